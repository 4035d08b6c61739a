//! The two-parameter Weibull family with `θ = (σ, p)` (scale, shape), its
//! `ξ`/`η` helper integrals, and the score-moment matrices `R_c = ∫uuᵀf^c`.
//!
//! A subtlety governs the whole module: powers of the Weibull density are
//! not automatically integrable. Near the origin `f^c ∼ x^{c(p−1)}`, so
//! `∫f^c` converges **iff** `c(p−1) + 1 > 0`. Outside that region the Γ
//! closed form would silently evaluate the gamma function at a negative
//! argument and return garbage — creating spurious objective minima at tiny
//! shapes — so every entry point guards the exponent and fails loudly with
//! a domain error instead.

use alloc::format;
use alloc::vec::Vec;

use super::{mad, mean, median, pop_sd, ParametricModel};
use crate::numerics::fmath;
use crate::numerics::quadrature::{integrate, QuadratureSpec};
use crate::numerics::rng::RngStream;
use crate::numerics::{Domain, Mat};
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.5772156649015329;
/// π/√6, the ratio between the standard deviation of `log X` and `1/p`.
const PI_OVER_SQRT6: f64 = 1.2825498301618641;

/// The Weibull family `f_θ(x) = (p/σ)(x/σ)^{p−1} e^{−(x/σ)^p}` on `x > 0`,
/// `θ = (σ, p)` with `σ, p > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WeibullModel;

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.len() == 2 && theta[0] > 0.0 && theta[1] > 0.0 && theta[0].is_finite() && theta[1].is_finite()
    {
        Ok(())
    } else {
        Err(Error::domain("Weibull parameters require sigma > 0 and p > 0"))
    }
}

/// `ξ_{α,b}(θ) = ∫ (x/σ)^α f_θ^b(x) dx = (p/σ)^{b−1} b^{−s} Γ(s)` with
/// `s = (bp − b + α + 1)/p`.
///
/// # Errors
/// [`Error::Domain`] when `b ≤ 0` or `s ≤ 0` (the integral diverges at the
/// origin — the Γ form must not be evaluated there).
pub fn weibull_xi(alpha: f64, b: f64, theta: &[f64]) -> Result<f64> {
    check_theta(theta)?;
    let (sigma, p) = (theta[0], theta[1]);
    if b <= 0.0 {
        return Err(Error::domain(format!("weibull_xi requires b > 0, got {b}")));
    }
    let s = (b * p - b + alpha + 1.0) / p;
    if s <= 0.0 {
        return Err(Error::domain(format!(
            "weibull_xi diverges: gamma argument {s} <= 0 (alpha = {alpha}, b = {b}, p = {p})"
        )));
    }
    Ok(fmath::powf(p / sigma, b - 1.0) * fmath::powf(b, -s) * fmath::tgamma(s))
}

/// `η_{α,b,c}(θ) = σ (p/σ)^c ∫₀^∞ y^{α+cp−c} (log y)^b e^{−c y^p} dy`,
/// equal to `∫ (x/σ)^α (log(x/σ))^b f_θ^c(x) dx`.
///
/// Routes to [`weibull_xi`] when `b = 0` (the integrals coincide exactly);
/// otherwise evaluated by adaptive quadrature in the scale-free variable
/// `y = x/σ`.
///
/// # Errors
/// [`Error::Domain`] when `c ≤ 0` or the integral diverges
/// (`α + cp − c ≤ −1`); [`Error::NonConvergent`] from quadrature.
pub fn weibull_eta(alpha: f64, b: u32, c: f64, theta: &[f64]) -> Result<f64> {
    check_theta(theta)?;
    if b == 0 {
        return weibull_xi(alpha, c, theta);
    }
    let (sigma, p) = (theta[0], theta[1]);
    if c <= 0.0 {
        return Err(Error::domain(format!("weibull_eta requires c > 0, got {c}")));
    }
    let a = alpha + c * p - c;
    if a <= -1.0 {
        return Err(Error::domain(format!(
            "weibull_eta diverges: exponent {a} <= -1 (alpha = {alpha}, c = {c}, p = {p})"
        )));
    }
    let spec = QuadratureSpec::with_domain(Domain::PositiveHalfLine);
    let core = integrate(
        |y| {
            let lead = fmath::powf(y, a) * fmath::exp(-c * fmath::powf(y, p));
            if lead == 0.0 {
                // Avoid 0 · ∞ from the log factor in the far tail/origin.
                return 0.0;
            }
            let l = fmath::ln(y);
            let mut logs = 1.0;
            for _ in 0..b {
                logs *= l;
            }
            lead * logs
        },
        &spec,
    )?;
    Ok(sigma * fmath::powf(p / sigma, c) * core)
}

/// `R_c(θ) = ∫ u_θ u_θᵀ f_θ^c dx`, assembled from `ξ`/`η` terms.
///
/// `R_1` is the Fisher information; `J = R_{1+β}`, `A_γ = (1+γ)R_{1+γ}` and
/// the uncentred part of `K = R_{1+2β} − ξξᵀ` all reuse this.
///
/// # Errors
/// Propagates the divergence guards and quadrature failures of
/// [`weibull_xi`]/[`weibull_eta`].
pub fn weibull_r(c: f64, theta: &[f64]) -> Result<Mat> {
    check_theta(theta)?;
    let (sigma, p) = (theta[0], theta[1]);
    let x0 = weibull_xi(0.0, c, theta)?;
    let xp = weibull_xi(p, c, theta)?;
    let x2p = weibull_xi(2.0 * p, c, theta)?;
    let e01 = weibull_eta(0.0, 1, c, theta)?;
    let ep1 = weibull_eta(p, 1, c, theta)?;
    let e2p1 = weibull_eta(2.0 * p, 1, c, theta)?;
    let e02 = weibull_eta(0.0, 2, c, theta)?;
    let ep2 = weibull_eta(p, 2, c, theta)?;
    let e2p2 = weibull_eta(2.0 * p, 2, c, theta)?;
    let r11 = (p / sigma) * (p / sigma) * (x0 - 2.0 * xp + x2p);
    let r12 = (p / sigma) * (-x0 / p - e01 + 2.0 * ep1 + xp / p - e2p1);
    let r22 = x0 / (p * p) + e02 + e2p2 + 2.0 / p * e01 - 2.0 * ep2 - 2.0 / p * ep1;
    Ok(Mat::from_vec(2, 2, alloc::vec![r11, r12, r12, r22]))
}

impl ParametricModel for WeibullModel {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &'static str {
        "weibull"
    }

    fn support(&self) -> Domain {
        Domain::PositiveHalfLine
    }

    fn in_support(&self, x: f64) -> bool {
        x.is_finite() && x > 0.0
    }

    fn in_domain(&self, theta: &[f64]) -> bool {
        check_theta(theta).is_ok()
    }

    fn positive_params(&self) -> &'static [bool] {
        &[true, true]
    }

    fn log_density(&self, theta: &[f64], x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let (sigma, p) = (theta[0], theta[1]);
        let l = fmath::ln(x / sigma);
        fmath::ln(p / sigma) + (p - 1.0) * l - fmath::exp(p * l)
    }

    fn score(&self, theta: &[f64], x: f64) -> Vec<f64> {
        let (sigma, p) = (theta[0], theta[1]);
        let l = fmath::ln(x / sigma);
        let w = fmath::exp(p * l); // (x/σ)^p
        alloc::vec![(p / sigma) * (w - 1.0), 1.0 / p + l * (1.0 - w)]
    }

    fn information(&self, theta: &[f64], x: f64) -> Mat {
        let (sigma, p) = (theta[0], theta[1]);
        let l = fmath::ln(x / sigma);
        let w = fmath::exp(p * l);
        let i11 = p * ((1.0 + p) * w - 1.0) / (sigma * sigma);
        let i12 = (1.0 - w) / sigma - p * w * l / sigma;
        let i22 = 1.0 / (p * p) + w * l * l;
        Mat::from_vec(2, 2, alloc::vec![i11, i12, i12, i22])
    }

    fn standardize(&self, theta: &[f64]) -> (f64, f64) {
        (0.0, theta[0])
    }

    fn power_in_domain(&self, theta: &[f64], c: f64) -> bool {
        // ∫ f^c ∼ ∫₀ x^{c(p−1)} dx near the origin.
        c > 0.0 && c * (theta[1] - 1.0) + 1.0 > 0.0
    }

    fn cross_power_in_domain(&self, theta1: &[f64], theta2: &[f64], gamma: f64) -> bool {
        // ∫ f₂^γ f₁ ∼ ∫₀ x^{γ(p₂−1) + p₁ − 1} dx near the origin.
        gamma >= 0.0 && gamma * (theta2[1] - 1.0) + theta1[1] > 0.0
    }

    fn int_f_pow(&self, theta: &[f64], c: f64) -> Option<Result<f64>> {
        Some(weibull_xi(0.0, c, theta))
    }

    fn int_score_f_pow(&self, theta: &[f64], c: f64) -> Option<Result<Vec<f64>>> {
        let (sigma, p) = (theta[0], theta[1]);
        let inner = || -> Result<Vec<f64>> {
            let x0 = weibull_xi(0.0, c, theta)?;
            let xp = weibull_xi(p, c, theta)?;
            let e01 = weibull_eta(0.0, 1, c, theta)?;
            let ep1 = weibull_eta(p, 1, c, theta)?;
            Ok(alloc::vec![(p / sigma) * (xp - x0), x0 / p + e01 - ep1])
        };
        Some(inner())
    }

    fn int_score_outer_f_pow(&self, theta: &[f64], c: f64) -> Option<Result<Mat>> {
        Some(weibull_r(c, theta))
    }

    fn kl_divergence(&self, theta1: &[f64], theta2: &[f64]) -> Option<Result<f64>> {
        let (s1, p1) = (theta1[0], theta1[1]);
        let (s2, p2) = (theta2[0], theta2[1]);
        let inner = || -> Result<f64> {
            // E₁[log(X/σ₁)] and the two expectations E₁[(X/σᵢ)^{pᵢ}].
            let e_log = weibull_eta(0.0, 1, 1.0, theta1)?;
            let term1 = fmath::ln(p1 / s1) + (p1 - 1.0) * e_log - weibull_xi(p1, 1.0, theta1)?;
            let term2 = fmath::ln(p2 / s2) + (p2 - 1.0) * (e_log + fmath::ln(s1 / s2))
                - fmath::powf(s1 / s2, p2) * weibull_xi(p2, 1.0, theta1)?;
            Ok(term1 - term2)
        };
        Some(inner())
    }

    fn sample(&self, theta: &[f64], rng: &mut RngStream) -> f64 {
        let (sigma, p) = (theta[0], theta[1]);
        // Inverse CDF on U ∈ (0, 1); reject the measure-zero u = 0 draw so
        // the sample never lands exactly on the support boundary.
        loop {
            let u = rng.next_uniform();
            if u > 0.0 {
                return sigma * fmath::powf(-fmath::ln(u), 1.0 / p);
            }
        }
    }

    fn moment_start(&self, data: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = data.iter().filter(|&&x| x > 0.0).map(|&x| fmath::ln(x)).collect();
        if logs.is_empty() {
            return alloc::vec![1.0, 1.0];
        }
        // sd(log X) = (π/√6)/p and E[log X] = log σ − γ_E/p.
        let p0 = (PI_OVER_SQRT6 / pop_sd(&logs).max(1e-12)).clamp(0.05, 50.0);
        let sigma0 = fmath::exp(mean(&logs) + EULER_GAMMA / p0);
        alloc::vec![sigma0, p0]
    }

    fn robust_start(&self, data: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = data.iter().filter(|&&x| x > 0.0).map(|&x| fmath::ln(x)).collect();
        if logs.is_empty() {
            return alloc::vec![1.0, 1.0];
        }
        let scale = 1.4826 * mad(&logs);
        let scale = if scale > 0.0 { scale } else { pop_sd(&logs).max(1e-12) };
        let p0 = (PI_OVER_SQRT6 / scale).clamp(0.05, 50.0);
        // median(X) = σ (log 2)^{1/p}.
        let sigma0 = fmath::exp(median(&logs)) * fmath::powf(core::f64::consts::LN_2, -1.0 / p0);
        alloc::vec![sigma0, p0]
    }
}
