//! Parametric families: the [`ParametricModel`] abstraction, the normal and
//! Weibull instances with their closed-form integral helpers, and
//! [`ConstraintSpec`] for composite null hypotheses `g(θ) = 0`.
//!
//! Any type supplying a density, score and support participates in every
//! downstream operation through the quadrature fallbacks in [`integrals`];
//! the closed-form hooks are optional accelerators that the bundled models
//! implement.

mod normal;
mod weibull;

pub use normal::NormalModel;
pub use weibull::{weibull_eta, weibull_r, weibull_xi, WeibullModel};

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::numerics::rng::RngStream;
use crate::numerics::{Domain, Mat};
use crate::{Error, Result};

/// An identifiable parametric family `{f_θ : θ ∈ Θ}` of densities on a
/// common support, with score `u_θ(x) = ∂/∂θ log f_θ(x)` and the pointwise
/// information matrix `I_θ(x) = −∂u_θ(x)/∂θᵀ`.
///
/// Implementations must be immutable and cheap to share across threads;
/// every method is pure.
///
/// # Contracts
///
/// - `density ≥ 0` on the support and integrates to 1 over [`support`].
/// - `score` equals the gradient of `log_density` in `θ`.
/// - The optional integral hooks, when provided, must agree with direct
///   quadrature of their defining integrands; `None` routes callers to the
///   quadrature fallbacks in [`integrals`].
pub trait ParametricModel: Sync {
    /// Parameter dimension `p`.
    fn dim(&self) -> usize;

    /// Short family name (`"normal"`, `"weibull"`).
    fn name(&self) -> &'static str;

    /// The common support of the family, as a quadrature domain.
    fn support(&self) -> Domain;

    /// Whether the observation `x` lies in the support.
    fn in_support(&self, x: f64) -> bool;

    /// Whether `theta` lies in the parameter space Θ.
    fn in_domain(&self, theta: &[f64]) -> bool;

    /// Which coordinates of `θ` are constrained positive (these are
    /// optimized on a log scale and reported on the natural scale).
    fn positive_params(&self) -> &'static [bool];

    /// `log f_θ(x)`; `−∞` outside the support.
    fn log_density(&self, theta: &[f64], x: f64) -> f64;

    /// `f_θ(x)`; 0 outside the support.
    fn density(&self, theta: &[f64], x: f64) -> f64 {
        let l = self.log_density(theta, x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            crate::numerics::fmath::exp(l)
        }
    }

    /// Score `u_θ(x)`, a `p`-vector.
    fn score(&self, theta: &[f64], x: f64) -> Vec<f64>;

    /// Pointwise information `I_θ(x) = −∂u_θ(x)/∂θᵀ`, a `p×p` matrix whose
    /// expectation under `f_θ` is the Fisher information.
    fn information(&self, theta: &[f64], x: f64) -> Mat;

    /// An affine change of variables `x = shift + scale·z` mapping the
    /// support onto itself and bringing the density's mass to `O(1)`
    /// coordinates. Quadrature fallbacks integrate in `z`; the default is
    /// the identity.
    fn standardize(&self, _theta: &[f64]) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// Whether `∫ f_θ^c dx` (and the score-weighted variants) converge.
    /// Families whose density is unbounded must override this: powers of an
    /// integrable singularity need not stay integrable.
    fn power_in_domain(&self, _theta: &[f64], c: f64) -> bool {
        c > 0.0
    }

    /// Whether `∫ f_{θ2}^γ f_{θ1} dx` converges.
    fn cross_power_in_domain(&self, _theta1: &[f64], _theta2: &[f64], gamma: f64) -> bool {
        gamma >= 0.0
    }

    /// Closed form for `∫ f_θ^c dx`, when available.
    fn int_f_pow(&self, _theta: &[f64], _c: f64) -> Option<Result<f64>> {
        None
    }

    /// Closed form for `∫ u_θ f_θ^c dx`, when available.
    fn int_score_f_pow(&self, _theta: &[f64], _c: f64) -> Option<Result<Vec<f64>>> {
        None
    }

    /// Closed form for `∫ u_θ u_θᵀ f_θ^c dx`, when available.
    fn int_score_outer_f_pow(&self, _theta: &[f64], _c: f64) -> Option<Result<Mat>> {
        None
    }

    /// Closed form for the pairwise integral `∫ f_{θ2}^γ f_{θ1} dx`, when
    /// available.
    fn int_cross_pow(&self, _theta1: &[f64], _theta2: &[f64], _gamma: f64) -> Option<Result<f64>> {
        None
    }

    /// Closed form for the Kullback–Leibler divergence
    /// `∫ f_{θ1} log(f_{θ1}/f_{θ2}) dx`, when available.
    fn kl_divergence(&self, _theta1: &[f64], _theta2: &[f64]) -> Option<Result<f64>> {
        None
    }

    /// Draw one observation from `f_θ`.
    fn sample(&self, theta: &[f64], rng: &mut RngStream) -> f64;

    /// A moment-based starting value for optimizers.
    fn moment_start(&self, data: &[f64]) -> Vec<f64>;

    /// A robust (median/MAD-flavored) starting value, resistant to outliers.
    fn robust_start(&self, data: &[f64]) -> Vec<f64>;
}

/// A composite null hypothesis `g(θ) = 0_r`, with the `p×r` Jacobian
/// `G(θ) = ∂g(θ)ᵀ/∂θ`.
///
/// The common case — pinning coordinates to fixed values, like `μ = μ₀` —
/// is built with [`ConstraintSpec::pin`]; arbitrary smooth restrictions take
/// a closure via [`ConstraintSpec::general`]. When no analytic Jacobian is
/// supplied it is formed by central finite differences.
pub struct ConstraintSpec {
    r: usize,
    label: String,
    kind: Kind,
}

#[allow(clippy::type_complexity)]
enum Kind {
    /// Coordinates `θ[i]` pinned to fixed values.
    Pins(Vec<(usize, f64)>),
    General {
        g: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
        jac: Option<Box<dyn Fn(&[f64]) -> Mat + Send + Sync>>,
    },
}

impl core::fmt::Debug for ConstraintSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ConstraintSpec")
            .field("r", &self.r)
            .field("label", &self.label)
            .field("pinned", &self.pinned())
            .finish()
    }
}

impl ConstraintSpec {
    /// Pin a single parameter coordinate: `g(θ) = θ[index] − value`.
    pub fn pin(index: usize, value: f64, label: impl Into<String>) -> Self {
        ConstraintSpec { r: 1, label: label.into(), kind: Kind::Pins(alloc::vec![(index, value)]) }
    }

    /// Pin several coordinates at once. Indices must be distinct.
    ///
    /// # Panics
    /// Panics if `pins` is empty or contains a repeated index.
    pub fn pins(pins: Vec<(usize, f64)>, label: impl Into<String>) -> Self {
        assert!(!pins.is_empty(), "at least one pin required");
        for (k, &(i, _)) in pins.iter().enumerate() {
            assert!(
                pins.iter().skip(k + 1).all(|&(j, _)| j != i),
                "repeated pin index {i}"
            );
        }
        ConstraintSpec { r: pins.len(), label: label.into(), kind: Kind::Pins(pins) }
    }

    /// An arbitrary smooth restriction returning the `r`-vector `g(θ)`.
    pub fn general(
        r: usize,
        g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        assert!(r >= 1, "at least one restriction required");
        ConstraintSpec { r, label: label.into(), kind: Kind::General { g: Box::new(g), jac: None } }
    }

    /// Attach an analytic Jacobian `G(θ)` (`p×r`) to a general restriction.
    ///
    /// # Panics
    /// Panics when called on a pinned constraint (its Jacobian is implied).
    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> Mat + Send + Sync + 'static) -> Self {
        match &mut self.kind {
            Kind::General { jac: slot, .. } => *slot = Some(Box::new(jac)),
            Kind::Pins(_) => panic!("pinned constraints already have an exact Jacobian"),
        }
        self
    }

    /// Number of restrictions `r`.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Human-readable label, echoed in reports.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The pinned `(index, value)` pairs, when this constraint is a pin set.
    pub fn pinned(&self) -> Option<&[(usize, f64)]> {
        match &self.kind {
            Kind::Pins(p) => Some(p),
            Kind::General { .. } => None,
        }
    }

    /// Evaluate `g(θ)`.
    pub fn g(&self, theta: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Pins(pins) => pins.iter().map(|&(i, v)| theta[i] - v).collect(),
            Kind::General { g, .. } => g(theta),
        }
    }

    /// Evaluate the `p×r` Jacobian `G(θ)`; finite differences when no
    /// analytic form is attached.
    pub fn jacobian(&self, theta: &[f64]) -> Mat {
        let p = theta.len();
        match &self.kind {
            Kind::Pins(pins) => {
                let mut g_mat = Mat::zeros(p, pins.len());
                for (k, &(i, _)) in pins.iter().enumerate() {
                    g_mat[(i, k)] = 1.0;
                }
                g_mat
            }
            Kind::General { jac: Some(jac), .. } => jac(theta),
            Kind::General { g, jac: None } => {
                let mut g_mat = Mat::zeros(p, self.r);
                let mut lo = theta.to_vec();
                let mut hi = theta.to_vec();
                for j in 0..p {
                    let h = 1e-6 * (1.0 + crate::numerics::fmath::abs(theta[j]));
                    hi[j] = theta[j] + h;
                    lo[j] = theta[j] - h;
                    let (gp, gm) = (g(&hi), g(&lo));
                    for k in 0..self.r {
                        g_mat[(j, k)] = (gp[k] - gm[k]) / (2.0 * h);
                    }
                    hi[j] = theta[j];
                    lo[j] = theta[j];
                }
                g_mat
            }
        }
    }

    /// Check this constraint's structural invariants at `theta`:
    /// `r < p`, pin indices in range, `rank G(θ) = r`, and (for general
    /// constraints with an analytic Jacobian) agreement with central
    /// finite differences of `g` within `1e−5`.
    pub fn validate_at(&self, theta: &[f64]) -> Result<()> {
        let p = theta.len();
        if self.r >= p {
            return Err(Error::domain(format!(
                "constraint '{}' has r = {} restrictions but the model has only p = {p} parameters (need r < p)",
                self.label, self.r
            )));
        }
        if let Kind::Pins(pins) = &self.kind {
            if let Some(&(i, _)) = pins.iter().find(|&&(i, _)| i >= p) {
                return Err(Error::domain(format!(
                    "constraint '{}' pins coordinate {i}, out of range for p = {p}",
                    self.label
                )));
            }
        }
        let g_val = self.g(theta);
        if g_val.len() != self.r {
            return Err(Error::domain(format!(
                "constraint '{}' returned {} components, declared r = {}",
                self.label,
                g_val.len(),
                self.r
            )));
        }
        let g_mat = self.jacobian(theta);
        if g_mat.rows() != p || g_mat.cols() != self.r {
            return Err(Error::domain(format!(
                "constraint '{}' Jacobian is {}x{}, expected {p}x{}",
                self.label,
                g_mat.rows(),
                g_mat.cols(),
                self.r
            )));
        }
        // Numerical rank of G via the Gram matrix spectrum.
        let gram = g_mat.t().matmul(&g_mat);
        let (evals, _) = crate::numerics::symmetric_eigen(&gram)?;
        let max = evals.first().copied().unwrap_or(0.0).max(0.0);
        let found = evals.iter().filter(|&&e| e > 1e-10 * max.max(1e-300)).count();
        if max <= 0.0 || found != self.r {
            return Err(Error::RankMismatch { expected: self.r, found });
        }
        // Analytic Jacobians must match finite differences of g.
        if let Kind::General { jac: Some(_), g } = &self.kind {
            let fd = {
                let mut fd = Mat::zeros(p, self.r);
                let mut hi = theta.to_vec();
                let mut lo = theta.to_vec();
                for j in 0..p {
                    let h = 1e-6 * (1.0 + crate::numerics::fmath::abs(theta[j]));
                    hi[j] = theta[j] + h;
                    lo[j] = theta[j] - h;
                    let (gp, gm) = (g(&hi), g(&lo));
                    for k in 0..self.r {
                        fd[(j, k)] = (gp[k] - gm[k]) / (2.0 * h);
                    }
                    hi[j] = theta[j];
                    lo[j] = theta[j];
                }
                fd
            };
            let diff = g_mat.sub(&fd).max_abs();
            let scale = g_mat.max_abs().max(1.0);
            if diff > 1e-5 * scale {
                return Err(Error::domain(format!(
                    "constraint '{}' Jacobian disagrees with finite differences by {diff:e}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// Hook-or-quadrature dispatch for the model integrals used throughout the
/// crate. Every function first consults the model's closed-form hook and
/// falls back to adaptive quadrature in standardized coordinates.
pub mod integrals {
    use super::*;
    use crate::numerics::quadrature::{integrate, QuadratureSpec};

    fn check_power(model: &dyn ParametricModel, theta: &[f64], c: f64) -> Result<()> {
        if !model.in_domain(theta) {
            return Err(Error::domain(format!(
                "theta outside the {} parameter space",
                model.name()
            )));
        }
        if !model.power_in_domain(theta, c) {
            return Err(Error::domain(format!(
                "integral of f^{c} diverges at this {} parameter",
                model.name()
            )));
        }
        Ok(())
    }

    /// Integrate `φ(x)` over the model support in standardized coordinates.
    fn integrate_std(
        model: &dyn ParametricModel,
        theta: &[f64],
        phi: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let (shift, scale) = model.standardize(theta);
        let spec = QuadratureSpec::with_domain(model.support());
        integrate(|z| phi(shift + scale * z) * scale, &spec)
    }

    /// `∫ f_θ^c dx`.
    pub fn f_pow(model: &dyn ParametricModel, theta: &[f64], c: f64) -> Result<f64> {
        check_power(model, theta, c)?;
        if let Some(v) = model.int_f_pow(theta, c) {
            return v;
        }
        integrate_std(model, theta, |x| {
            let f = model.density(theta, x);
            if f > 0.0 {
                crate::numerics::fmath::powf(f, c)
            } else {
                0.0
            }
        })
    }

    /// `∫ u_θ f_θ^c dx` (a `p`-vector).
    pub fn score_f_pow(model: &dyn ParametricModel, theta: &[f64], c: f64) -> Result<Vec<f64>> {
        check_power(model, theta, c)?;
        if let Some(v) = model.int_score_f_pow(theta, c) {
            return v;
        }
        let p = model.dim();
        let mut out = Vec::with_capacity(p);
        for i in 0..p {
            out.push(integrate_std(model, theta, |x| {
                let f = model.density(theta, x);
                if f > 0.0 {
                    model.score(theta, x)[i] * crate::numerics::fmath::powf(f, c)
                } else {
                    0.0
                }
            })?);
        }
        Ok(out)
    }

    /// `∫ u_θ u_θᵀ f_θ^c dx` (a symmetric `p×p` matrix).
    pub fn score_outer_f_pow(model: &dyn ParametricModel, theta: &[f64], c: f64) -> Result<Mat> {
        check_power(model, theta, c)?;
        if let Some(v) = model.int_score_outer_f_pow(theta, c) {
            return v;
        }
        let p = model.dim();
        let mut out = Mat::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = integrate_std(model, theta, |x| {
                    let f = model.density(theta, x);
                    if f > 0.0 {
                        let u = model.score(theta, x);
                        u[i] * u[j] * crate::numerics::fmath::powf(f, c)
                    } else {
                        0.0
                    }
                })?;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// The pairwise integral `∫ f_{θ2}^γ f_{θ1} dx`; equals 1 at `γ = 0`.
    pub fn cross_pow(
        model: &dyn ParametricModel,
        theta1: &[f64],
        theta2: &[f64],
        gamma: f64,
    ) -> Result<f64> {
        if !model.in_domain(theta1) || !model.in_domain(theta2) {
            return Err(Error::domain(format!(
                "theta outside the {} parameter space",
                model.name()
            )));
        }
        if gamma == 0.0 {
            return Ok(1.0);
        }
        if !model.cross_power_in_domain(theta1, theta2, gamma) {
            return Err(Error::domain(format!(
                "integral of f_2^{gamma} f_1 diverges at these {} parameters",
                model.name()
            )));
        }
        if let Some(v) = model.int_cross_pow(theta1, theta2, gamma) {
            return v;
        }
        integrate_std(model, theta1, |x| {
            let f2 = model.density(theta2, x);
            if f2 > 0.0 {
                crate::numerics::fmath::powf(f2, gamma) * model.density(theta1, x)
            } else {
                0.0
            }
        })
    }

    /// `∫ i_θ(x) f_θ^c dx` entrywise — the information function weighted by
    /// a density power. Always quadrature; no model ships a closed form
    /// (only the off-model sandwich of Eqs. 2.3–2.4 needs it).
    pub fn information_f_pow(model: &dyn ParametricModel, theta: &[f64], c: f64) -> Result<Mat> {
        check_power(model, theta, c)?;
        let p = model.dim();
        let mut out = Mat::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = integrate_std(model, theta, |x| {
                    let f = model.density(theta, x);
                    if f > 0.0 {
                        model.information(theta, x)[(i, j)] * crate::numerics::fmath::powf(f, c)
                    } else {
                        0.0
                    }
                })?;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// `∫ φ(x) f_θ(x) dx` — a generic expectation under `f_θ` by adaptive
    /// quadrature in standardized coordinates.
    pub fn expect_under(
        model: &dyn ParametricModel,
        theta: &[f64],
        phi: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        if !model.in_domain(theta) {
            return Err(Error::domain(format!(
                "theta outside the {} parameter space",
                model.name()
            )));
        }
        integrate_std(model, theta, |x| {
            let f = model.density(theta, x);
            if f > 0.0 {
                phi(x) * f
            } else {
                0.0
            }
        })
    }

    /// Kullback–Leibler divergence `∫ f_{θ1} log(f_{θ1}/f_{θ2}) dx`.
    pub fn kl(model: &dyn ParametricModel, theta1: &[f64], theta2: &[f64]) -> Result<f64> {
        if !model.in_domain(theta1) || !model.in_domain(theta2) {
            return Err(Error::domain(format!(
                "theta outside the {} parameter space",
                model.name()
            )));
        }
        if let Some(v) = model.kl_divergence(theta1, theta2) {
            return v;
        }
        integrate_std(model, theta1, |x| {
            // Clip below 1e−300: where f₁ has no mass the log-ratio factor
            // can be ±∞ and the product would poison the panel with NaN.
            let f1 = model.density(theta1, x);
            if f1 > 1e-300 {
                f1 * (model.log_density(theta1, x) - model.log_density(theta2, x))
            } else {
                0.0
            }
        })
    }
}

/// Sample mean.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population (divide-by-n) standard deviation.
pub(crate) fn pop_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    crate::numerics::fmath::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}

/// Median (of a copy; the input is left untouched).
pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about the median (unscaled).
pub(crate) fn mad(xs: &[f64]) -> f64 {
    let m = median(xs);
    let devs: Vec<f64> = xs.iter().map(|x| crate::numerics::fmath::abs(x - m)).collect();
    median(&devs)
}
