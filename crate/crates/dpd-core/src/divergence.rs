//! The density power divergence `d_γ` between two family members, and the
//! empirical DPD objective / estimating function that the minimum-DPD
//! estimators optimize.
//!
//! For `γ > 0` and densities `h, f`,
//!
//! ```text
//! d_γ(h, f) = ∫ f^{1+γ} − (1 + 1/γ) ∫ f^γ h + (1/γ) ∫ h^{1+γ},
//! ```
//!
//! and the continuous limit at `γ = 0` is the Kullback–Leibler divergence
//! `∫ h log(h/f)`. Between two parametric members every term is computable,
//! so the `(1/γ)∫h^{1+γ}` term — constant in the minimization that defines
//! the estimators — **is** included here: the test statistic needs the
//! genuine divergence, not the objective-function remnant of it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::models::{integrals, ParametricModel};
use crate::numerics::fmath;
use crate::{Error, Result};

/// Tuning values below this are routed to the analytic `β → 0` / `γ → 0`
/// limits: the `(1 + 1/β)` factor is numerically catastrophic near zero.
pub const LIMIT_EPS: f64 = 1e-8;

/// The `(β, γ)` tuning pair: `beta` drives estimation, `gamma` the test
/// statistic's divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceConfig {
    /// Estimation tuning parameter `β ≥ 0`.
    pub beta: f64,
    /// Test divergence parameter `γ ≥ 0`.
    pub gamma: f64,
}

impl DivergenceConfig {
    /// Validate and build; both parameters must be finite and nonnegative.
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(DivergenceConfig { beta, gamma })
    }

    /// `β` with sub-`1e−8` values snapped to the exact limit 0.
    pub fn effective_beta(&self) -> f64 {
        if self.beta < LIMIT_EPS {
            0.0
        } else {
            self.beta
        }
    }

    /// `γ` with sub-`1e−8` values snapped to the exact limit 0.
    pub fn effective_gamma(&self) -> f64 {
        if self.gamma < LIMIT_EPS {
            0.0
        } else {
            self.gamma
        }
    }
}

/// An observed sample with a label for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<f64>,
    label: String,
}

impl Dataset {
    /// Build a dataset; it must be nonempty and free of non-finite values.
    pub fn new(observations: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if observations.is_empty() {
            return Err(Error::domain(format!("dataset '{label}' is empty")));
        }
        if let Some(bad) = observations.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!(
                "dataset '{label}' contains a non-finite observation {bad}"
            )));
        }
        Ok(Dataset { observations, label })
    }

    /// The observations.
    pub fn values(&self) -> &[f64] {
        &self.observations
    }

    /// Sample size `n`.
    pub fn n(&self) -> usize {
        self.observations.len()
    }

    /// The label given at construction.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Error unless every observation lies in the model's support.
    pub fn check_support(&self, model: &dyn ParametricModel) -> Result<()> {
        match self.observations.iter().find(|&&x| !model.in_support(x)) {
            None => Ok(()),
            Some(bad) => Err(Error::domain(format!(
                "dataset '{}' has observation {bad} outside the {} support",
                self.label,
                model.name()
            ))),
        }
    }
}

/// The density power divergence `d_γ(f_{θ1}, f_{θ2})` — the first argument
/// plays the role of `h` in the display above.
///
/// Returns exactly 0 when `θ1 == θ2`. At `γ < 1e−8` the Kullback–Leibler
/// limit is used. Values in `(−1e−8, 0)` — quadrature noise around a true
/// zero — are clamped to 0; anything more negative is reported as
/// [`Error::NonConvergent`], since a genuinely negative divergence can only
/// be a numerical failure.
///
/// # Errors
/// [`Error::Domain`] for parameters outside Θ or divergent power integrals;
/// [`Error::NonConvergent`] from quadrature or the negativity guard.
pub fn dpd(
    model: &dyn ParametricModel,
    theta1: &[f64],
    theta2: &[f64],
    gamma: f64,
) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!("gamma must be >= 0, got {gamma}")));
    }
    if !model.in_domain(theta1) || !model.in_domain(theta2) {
        return Err(Error::domain(format!(
            "theta outside the {} parameter space",
            model.name()
        )));
    }
    if theta1 == theta2 {
        return Ok(0.0);
    }
    let value = if gamma < LIMIT_EPS {
        integrals::kl(model, theta1, theta2)?
    } else if model.int_cross_pow(theta1, theta2, gamma).is_some() {
        // Every term has a closed form: assemble the three-term expression.
        let f2_pow = integrals::f_pow(model, theta2, 1.0 + gamma)?;
        let cross = integrals::cross_pow(model, theta1, theta2, gamma)?;
        let f1_pow = integrals::f_pow(model, theta1, 1.0 + gamma)?;
        f2_pow - (1.0 + 1.0 / gamma) * cross + f1_pow / gamma
    } else {
        // No closed form for the cross term. Integrating the three pieces
        // separately would multiply quadrature error by 1/γ, so integrate
        // the combined integrand once, rewritten so each evaluation is
        // accurate pointwise even as γ → 0:
        //   f₂^γ(f₂ − f₁) + (f₁^{1+γ} − f₁ f₂^γ)/γ
        // with the second piece computed through expm1 in log space.
        combined_quadrature(model, theta1, theta2, gamma)?
    };
    if value >= 0.0 {
        Ok(value)
    } else if value > -1e-8 {
        Ok(0.0)
    } else {
        Err(Error::non_convergent(
            format!("divergence evaluated negative ({value:e}); integral cancellation failed"),
            -value,
        ))
    }
}

/// Quadrature of the full DPD integrand in one pass (see [`dpd`]).
fn combined_quadrature(
    model: &dyn ParametricModel,
    theta1: &[f64],
    theta2: &[f64],
    gamma: f64,
) -> Result<f64> {
    if !model.power_in_domain(theta1, 1.0 + gamma)
        || !model.power_in_domain(theta2, 1.0 + gamma)
        || !model.cross_power_in_domain(theta1, theta2, gamma)
    {
        return Err(Error::domain(format!(
            "a power integral of the DPD diverges at these {} parameters",
            model.name()
        )));
    }
    let (shift, scale) = model.standardize(theta1);
    let spec = crate::numerics::QuadratureSpec::with_domain(model.support());
    crate::numerics::quadrature::integrate(
        |z| {
            let x = shift + scale * z;
            let l1 = model.log_density(theta1, x);
            let l2 = model.log_density(theta2, x);
            // Clip: below 1e−300 the power factors underflow and the
            // region's true contribution is itself below any tolerance.
            const LOG_CLIP: f64 = -690.0;
            if l1 <= LOG_CLIP && l2 <= LOG_CLIP {
                return 0.0;
            }
            let value = if l1 <= LOG_CLIP {
                // Only the f₂^{1+γ} term survives.
                fmath::exp((1.0 + gamma) * l2)
            } else if l2 <= LOG_CLIP && gamma * (l1 - l2) > 30.0 {
                // f₂ has no mass here: (1/γ)f₁^{1+γ} dominates exactly.
                fmath::exp((1.0 + gamma) * l1) / gamma
            } else {
                let a = fmath::exp(gamma * l2) * (fmath::exp(l2) - fmath::exp(l1));
                let d = gamma * (l1 - l2);
                let b = if d > 30.0 {
                    // No cancellation between the two exponentials.
                    (fmath::exp((1.0 + gamma) * l1) - fmath::exp(l1 + gamma * l2)) / gamma
                } else {
                    fmath::exp(l1 + gamma * l2) * fmath::expm1(d) / gamma
                };
                a + b
            };
            value * scale
        },
        &spec,
    )
}

/// The empirical DPD objective
/// `(1/n) Σᵢ V_θ(Xᵢ)` with `V_θ(x) = ∫f_θ^{1+β} − (1 + 1/β) f_θ^β(x)`,
/// reducing to the negative mean log-likelihood at `β < 1e−8`.
///
/// # Errors
/// [`Error::Domain`] when `θ ∉ Θ`, when `∫f^{1+β}` diverges at this `θ`, or
/// when an observation lies outside the support.
pub fn empirical_objective(
    model: &dyn ParametricModel,
    theta: &[f64],
    data: &Dataset,
    beta: f64,
) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0, got {beta}")));
    }
    if !model.in_domain(theta) {
        return Err(Error::domain(format!(
            "theta outside the {} parameter space",
            model.name()
        )));
    }
    data.check_support(model)?;
    let n = data.n() as f64;
    if beta < LIMIT_EPS {
        let mut total = 0.0;
        for &x in data.values() {
            total += model.log_density(theta, x);
        }
        return Ok(-total / n);
    }
    let int_f = integrals::f_pow(model, theta, 1.0 + beta)?;
    let factor = 1.0 + 1.0 / beta;
    let mut total = 0.0;
    for &x in data.values() {
        total += fmath::exp(beta * model.log_density(theta, x));
    }
    Ok(int_f - factor * total / n)
}

/// The estimating function
/// `(1/n) Σᵢ u_θ(Xᵢ) f_θ^β(Xᵢ) − ∫ u_θ f_θ^{1+β} dx`,
/// which equals `−(1+β)⁻¹` times the gradient of [`empirical_objective`]
/// and vanishes at the minimum-DPD estimate. At `β < 1e−8` the integral
/// term is the mean-zero score identity, so only the sample mean of the
/// score remains.
///
/// # Errors
/// As for [`empirical_objective`].
pub fn estimating_function(
    model: &dyn ParametricModel,
    theta: &[f64],
    data: &Dataset,
    beta: f64,
) -> Result<Vec<f64>> {
    if !(beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0, got {beta}")));
    }
    if !model.in_domain(theta) {
        return Err(Error::domain(format!(
            "theta outside the {} parameter space",
            model.name()
        )));
    }
    data.check_support(model)?;
    let p = model.dim();
    let n = data.n() as f64;
    let mut out = alloc::vec![0.0; p];
    if beta < LIMIT_EPS {
        for &x in data.values() {
            let u = model.score(theta, x);
            for i in 0..p {
                out[i] += u[i];
            }
        }
        for o in out.iter_mut() {
            *o /= n;
        }
        return Ok(out);
    }
    for &x in data.values() {
        let w = fmath::exp(beta * model.log_density(theta, x));
        let u = model.score(theta, x);
        for i in 0..p {
            out[i] += u[i] * w;
        }
    }
    let int_term = integrals::score_f_pow(model, theta, 1.0 + beta)?;
    for i in 0..p {
        out[i] = out[i] / n - int_term[i];
    }
    Ok(out)
}
