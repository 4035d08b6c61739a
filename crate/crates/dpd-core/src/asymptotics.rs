//! The matrix layer of the theory: `J_β`, `K_β`, `ξ_β`, `A_γ`, the
//! constrained projections `P`, `Q`, `B_β`, the RMDPDE covariance
//! `Σ_β = P K P`, and the null spectrum `λᵢ^{β,γ}` of the test statistic.
//!
//! Under the model,
//!
//! ```text
//! J_β = ∫ u uᵀ f^{1+β},   ξ_β = ∫ u f^{1+β},   K_β = ∫ u uᵀ f^{1+2β} − ξξᵀ,
//! A_γ = (1+γ) ∫ u uᵀ f^{1+γ},
//! Q = J⁻¹G [GᵀJ⁻¹G]⁻¹,    P = J⁻¹ − Q Gᵀ J⁻¹,    B = Q Gᵀ J⁻¹.
//! ```
//!
//! The null law of the statistic is the chi-square mixture whose weights are
//! the nonzero eigenvalues of `A_γ B_β K_β B_β` — computed here through the
//! symmetric equivalent `Sᵀ A S` with `S` a square root of `B K B` restricted
//! to its rank-`r` subspace, so only symmetric eigenproblems ever arise.

use alloc::format;
use alloc::vec::Vec;

use crate::divergence::Dataset;
use crate::models::{integrals, ConstraintSpec, ParametricModel};
use crate::numerics::linalg::{symmetric_eigen, Mat};
use crate::{Error, Result};

/// Relative retention threshold for the rank-`r` cut of `B K B`.
const RANK_THRESHOLD: f64 = 1e-8;

/// The matrices of the asymptotic theory, evaluated at one `θ`.
///
/// [`model_matrices`] fills the under-the-model blocks `J`, `K`, `ξ`, `A`;
/// [`constrained_matrices`] additionally fills [`AsymptoticMatrices::constrained`]
/// with the projections attached to a composite null.
#[derive(Debug, Clone)]
pub struct AsymptoticMatrices {
    /// Sensitivity `J_β` (positive definite under condition (LB4)); `p×p`.
    pub j: Mat,
    /// Variability `K_β = ∫uuᵀf^{1+2β} − ξξᵀ`; `p×p`.
    pub k: Mat,
    /// `ξ_β = ∫ u f^{1+β}`; zero at `β = 0`.
    pub xi: Vec<f64>,
    /// `A_γ = (1+γ)∫uuᵀf^{1+γ}` — the divergence curvature.
    pub a: Mat,
    /// Projection blocks for a constrained null, when requested.
    pub constrained: Option<ConstrainedPart>,
}

/// Constraint-dependent blocks of [`AsymptoticMatrices`].
#[derive(Debug, Clone)]
pub struct ConstrainedPart {
    /// The constraint Jacobian `G(θ)`, `p×r`.
    pub g: Mat,
    /// `P = J⁻¹ − Q Gᵀ J⁻¹`; satisfies `P G = 0`.
    pub p: Mat,
    /// `Q = J⁻¹ G [GᵀJ⁻¹G]⁻¹`, `p×r`.
    pub q: Mat,
    /// `B = Q Gᵀ J⁻¹`, symmetric PSD with rank `r`.
    pub b: Mat,
    /// RMDPDE asymptotic covariance `Σ = P K P`.
    pub sigma: Mat,
}

/// The chi-square-mixture weights of the null distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpectrum {
    /// The `k` positive eigenvalues `λᵢ^{β,γ}(θ)`, descending.
    pub eigenvalues: Vec<f64>,
    /// Number of mixture components; always the constraint rank `r`.
    pub k: usize,
}

/// Square-root decomposition shared by the null spectrum and the
/// contiguous-alternative machinery: `B K B = S Sᵀ` with `S` of full column
/// rank `r`, and `Sᵀ A S = V Λ Vᵀ`.
#[derive(Debug, Clone)]
pub(crate) struct SpectrumParts {
    /// Eigenvalues of `Sᵀ A S`, descending — the mixture weights.
    pub eigenvalues: Vec<f64>,
    /// `p×r` square root of `B K B` restricted to its rank-`r` subspace.
    pub s: Mat,
    /// `r×r` orthonormal eigenvectors of `Sᵀ A S` (columns).
    pub v: Mat,
}

/// Under-the-model matrices `J_β`, `K_β`, `ξ_β`, `A_γ` at `θ`.
///
/// # Errors
/// [`Error::Domain`] for `θ` outside the parameter space or β/γ negative;
/// [`Error::NotPositiveDefinite`] when `J` fails condition (LB4);
/// quadrature errors propagate for hook-less models.
pub fn model_matrices(
    model: &dyn ParametricModel,
    theta: &[f64],
    beta: f64,
    gamma: f64,
) -> Result<AsymptoticMatrices> {
    if !(beta >= 0.0) || !(gamma >= 0.0) {
        return Err(Error::domain(format!(
            "tuning parameters must be nonnegative (beta = {beta}, gamma = {gamma})"
        )));
    }
    let j = integrals::score_outer_f_pow(model, theta, 1.0 + beta)?;
    let xi = integrals::score_f_pow(model, theta, 1.0 + beta)?;
    let raw = integrals::score_outer_f_pow(model, theta, 1.0 + 2.0 * beta)?;
    let k = raw.sub(&Mat::outer(&xi, &xi));
    // Under the model A_γ = (1+γ) J_γ (Eq. (A_gama) identity).
    let a = integrals::score_outer_f_pow(model, theta, 1.0 + gamma)?.scale(1.0 + gamma);

    let (j_eigs, _) = symmetric_eigen(&j)?;
    let min_eig = *j_eigs.last().expect("p >= 1");
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eig });
    }
    Ok(AsymptoticMatrices { j, k, xi, a, constrained: None })
}

/// [`model_matrices`] plus the constrained blocks `P`, `Q`, `B`, `Σ`.
///
/// # Errors
/// As [`model_matrices`]; additionally [`Error::SingularProjection`] when
/// `GᵀJ⁻¹G` cannot be inverted, and constraint-validation errors from
/// [`ConstraintSpec::validate_at`].
pub fn constrained_matrices(
    model: &dyn ParametricModel,
    theta: &[f64],
    beta: f64,
    gamma: f64,
    constraint: &ConstraintSpec,
) -> Result<AsymptoticMatrices> {
    if constraint.r() >= model.dim() {
        return Err(Error::domain(format!(
            "constraint rank r = {} must be smaller than p = {}",
            constraint.r(),
            model.dim()
        )));
    }
    constraint.validate_at(theta)?;
    let mut mats = model_matrices(model, theta, beta, gamma)?;
    let g = constraint.jacobian(theta);
    let j_inv = mats.j.inverse().map_err(|_| Error::SingularProjection)?;
    let gram = g.t().matmul(&j_inv).matmul(&g);
    let gram_inv = gram.inverse().map_err(|_| Error::SingularProjection)?;
    let q = j_inv.matmul(&g).matmul(&gram_inv);
    let b = q.matmul(&g.t()).matmul(&j_inv).symmetrized();
    let p = j_inv.sub(&q.matmul(&g.t()).matmul(&j_inv)).symmetrized();
    let sigma = p.matmul(&mats.k).matmul(&p).symmetrized();
    mats.constrained = Some(ConstrainedPart { g, p, q, b, sigma });
    Ok(mats)
}

/// The `k = r` positive eigenvalues of `A_γ B_β K_β B_β` at `θ` — the
/// weights of the Theorem 3 chi-square mixture.
///
/// # Errors
/// As [`constrained_matrices`]; [`Error::RankMismatch`] when the number of
/// eigenvalues of `B K B` above the `1e−8` relative threshold differs from
/// `r` (a numerical or model-specification bug, never truncated silently).
pub fn null_spectrum(
    model: &dyn ParametricModel,
    theta: &[f64],
    beta: f64,
    gamma: f64,
    constraint: &ConstraintSpec,
) -> Result<NullSpectrum> {
    let mats = constrained_matrices(model, theta, beta, gamma, constraint)?;
    let part = mats.constrained.as_ref().expect("constrained_matrices fills it");
    let bkb = part.b.matmul(&mats.k).matmul(&part.b).symmetrized();
    let parts = spectrum_parts(&mats.a, &bkb, constraint.r())?;
    Ok(NullSpectrum { eigenvalues: parts.eigenvalues, k: constraint.r() })
}

/// Decompose `B K B = S Sᵀ` (rank `r`) and diagonalize `Sᵀ A S`.
///
/// The nonzero eigenvalues of the nonsymmetric product `A · BKB` equal those
/// of the symmetric `Sᵀ A S` by similarity, so the mixture weights come out
/// of a symmetric eigenproblem.
pub(crate) fn spectrum_parts(a: &Mat, bkb: &Mat, r: usize) -> Result<SpectrumParts> {
    let (mu, vecs) = symmetric_eigen(bkb)?;
    let scale = mu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let found = mu.iter().take_while(|&&m| m > RANK_THRESHOLD * scale).count();
    if found != r {
        return Err(Error::RankMismatch { expected: r, found });
    }
    let p = bkb.rows();
    let mut s = Mat::zeros(p, r);
    for col in 0..r {
        let root = crate::numerics::fmath::sqrt(mu[col]);
        for row in 0..p {
            s[(row, col)] = root * vecs[(row, col)];
        }
    }
    let m = s.t().matmul(a).matmul(&s).symmetrized();
    let (eigenvalues, v) = symmetric_eigen(&m)?;
    let min_eig = *eigenvalues.last().expect("r >= 1");
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eig });
    }
    Ok(SpectrumParts { eigenvalues, s, v })
}

/// Off-model sandwich blocks `J̃_β`, `K̃_β` of Eqs. (2.3)–(2.4), with the
/// expectations under the true density replaced by sample averages:
///
/// ```text
/// J̃ = ∫uuᵀf^{1+β} + Ê[(i_θ(X) − β u uᵀ) f^β(X)] − ∫(i_θ − βuuᵀ) f^{1+β},
/// K̃ = Ê[u uᵀ f^{2β}(X)] − ξ̃ ξ̃ᵀ,   ξ̃ = Ê[u f^β(X)].
/// ```
///
/// When the data really come from `f_θ` these converge to the
/// [`model_matrices`] blocks; at `β = 0`, `J̃` is the observed information.
///
/// # Errors
/// [`Error::Domain`] as usual, plus quadrature failures.
pub fn empirical_matrices(
    model: &dyn ParametricModel,
    theta: &[f64],
    beta: f64,
    data: &Dataset,
) -> Result<(Mat, Mat)> {
    if !(beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0, got {beta}")));
    }
    data.check_support(model)?;
    let p = model.dim();
    let n = data.n() as f64;

    let m1 = integrals::score_outer_f_pow(model, theta, 1.0 + beta)?;
    let info_int = integrals::information_f_pow(model, theta, 1.0 + beta)?;

    let mut emp_j = Mat::zeros(p, p);
    let mut emp_uu = Mat::zeros(p, p);
    let mut xi_tilde = alloc::vec![0.0; p];
    for &x in data.values() {
        let u = model.score(theta, x);
        let info = model.information(theta, x);
        let lf = model.log_density(theta, x);
        let fb = crate::numerics::fmath::exp(beta * lf);
        let f2b = fb * fb;
        for i in 0..p {
            xi_tilde[i] += u[i] * fb;
            for j in 0..p {
                emp_j[(i, j)] += (info[(i, j)] - beta * u[i] * u[j]) * fb;
                emp_uu[(i, j)] += u[i] * u[j] * f2b;
            }
        }
    }
    let emp_j = emp_j.scale(1.0 / n);
    let emp_uu = emp_uu.scale(1.0 / n);
    for v in xi_tilde.iter_mut() {
        *v /= n;
    }

    // J̃ = M1 + Ê[(i − βuuᵀ)f^β] − (∫ i f^{1+β} − β·M1).
    let j_tilde = m1
        .add(&emp_j)
        .sub(&info_int.sub(&m1.scale(beta)))
        .symmetrized();
    let k_tilde = emp_uu.sub(&Mat::outer(&xi_tilde, &xi_tilde)).symmetrized();
    Ok((j_tilde, k_tilde))
}

/// Corollary 4 closed form for the single eigenvalue of the normal location
/// problem: `λ₁ = (β+1)³ / (σ^γ √(γ+1) (2β+1)^{3/2} (2π)^{γ/2})`.
///
/// Exposed for cross-checking and for the signed one-sided statistic, which
/// rescales the test statistic by this weight.
pub fn normal_location_eigenvalue(beta: f64, gamma: f64, sigma: f64) -> f64 {
    use crate::numerics::fmath::{powf, sqrt};
    let num = powf(1.0 + beta, 3.0);
    let den = powf(sigma, gamma)
        * sqrt(1.0 + gamma)
        * powf(1.0 + 2.0 * beta, 1.5)
        * powf(2.0 * core::f64::consts::PI, 0.5 * gamma);
    num / den
}
