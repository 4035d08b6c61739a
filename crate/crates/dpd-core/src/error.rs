//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Unified error type for numerical, statistical and validation failures.
///
/// Variants carry the diagnostic payload needed to act on the failure;
/// everything is plain data so errors can cross thread boundaries.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A quadrature or iterative routine did not reach its tolerance within
    /// the configured budget.
    NonConvergent {
        /// What failed to converge.
        context: String,
        /// Last error estimate or residual observed.
        residual: f64,
    },
    /// An input lies outside the mathematical domain of the operation
    /// (parameter outside Θ, observation outside the support, divergent
    /// integral, invalid configuration value).
    Domain {
        /// Description of the violated requirement.
        context: String,
    },
    /// The objective decreased past the guard threshold; the problem is
    /// unbounded below (e.g. a scale parameter collapsing to zero).
    UnboundedBelow {
        /// Objective value at the point where the guard tripped.
        objective: f64,
    },
    /// A matrix expected to be symmetric was not, beyond tolerance.
    NotSymmetric {
        /// Largest relative asymmetry found.
        max_asymmetry: f64,
    },
    /// A matrix required to be positive definite has a non-positive
    /// eigenvalue (condition (LB4)-type failures).
    NotPositiveDefinite {
        /// Offending smallest eigenvalue.
        min_eigenvalue: f64,
    },
    /// A linear system or inverse could not be formed.
    SingularMatrix {
        /// What was being inverted.
        context: String,
    },
    /// The constraint projection GᵀJ⁻¹G is numerically singular.
    SingularProjection,
    /// The computed null spectrum does not contain exactly `expected`
    /// eigenvalues above the retention threshold.
    RankMismatch {
        /// Number of eigenvalues required (the constraint rank r).
        expected: usize,
        /// Number actually retained.
        found: usize,
    },
    /// The data cannot identify the parameters (empty, a single point, or
    /// zero spread collapsing a scale estimate).
    DegenerateData {
        /// Description of the degeneracy.
        context: String,
    },
    /// No feasible point satisfying g(θ) = 0 could be located.
    ConstraintInfeasible {
        /// Description and the best constraint violation reached.
        context: String,
    },
    /// The Monte Carlo sample is too small to resolve the requested tail
    /// probability (α < 10/mc_draws).
    McUnderResolved {
        /// Requested tail level.
        alpha: f64,
        /// Number of Monte Carlo draws configured.
        mc_draws: u64,
    },
    /// The asymptotic variance σ² of the statistic degenerated (≤ 1e−12) so
    /// a normal approximation or a sample-size inversion is meaningless.
    DegenerateVariance {
        /// The offending variance value.
        sigma2: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonConvergent { context, residual } => {
                write!(f, "did not converge: {context} (residual {residual:e})")
            }
            Error::Domain { context } => write!(f, "domain error: {context}"),
            Error::UnboundedBelow { objective } => {
                write!(f, "objective unbounded below (reached {objective:e})")
            }
            Error::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix not symmetric (relative asymmetry {max_asymmetry:e})")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "matrix not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Error::SingularMatrix { context } => write!(f, "singular matrix: {context}"),
            Error::SingularProjection => write!(f, "constraint projection GᵀJ⁻¹G is singular"),
            Error::RankMismatch { expected, found } => write!(
                f,
                "null spectrum rank mismatch: expected {expected} eigenvalues, found {found}"
            ),
            Error::DegenerateData { context } => write!(f, "degenerate data: {context}"),
            Error::ConstraintInfeasible { context } => {
                write!(f, "constraint infeasible: {context}")
            }
            Error::McUnderResolved { alpha, mc_draws } => write!(
                f,
                "alpha = {alpha} is below the Monte Carlo resolution 10/{mc_draws}"
            ),
            Error::DegenerateVariance { sigma2 } => {
                write!(f, "degenerate asymptotic variance sigma^2 = {sigma2:e}")
            }
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// Shorthand for a [`Error::Domain`] with a formatted message.
    pub fn domain(context: impl Into<String>) -> Self {
        Error::Domain { context: context.into() }
    }

    /// Shorthand for a [`Error::NonConvergent`].
    pub fn non_convergent(context: impl Into<String>, residual: f64) -> Self {
        Error::NonConvergent { context: context.into(), residual }
    }

    /// Shorthand for a [`Error::DegenerateData`].
    pub fn degenerate(context: impl Into<String>) -> Self {
        Error::DegenerateData { context: context.into() }
    }
}
