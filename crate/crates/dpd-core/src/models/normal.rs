//! The normal family `N(μ, σ²)` with `θ = (μ, σ)`, including closed forms
//! for every integral the estimators and tests need, so nothing in the
//! normal path touches quadrature.

use alloc::vec::Vec;

use super::{mad, mean, median, pop_sd, ParametricModel};
use crate::numerics::fmath;
use crate::numerics::rng::RngStream;
use crate::numerics::{Domain, Mat};
use crate::Result;

const LN_2PI: f64 = 1.837877066409345; // ln(2π)

/// The normal location–scale family, `θ = (μ, σ)` with `σ > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalModel;

impl NormalModel {
    /// `∫ f_θ^c dx = c^{−1/2} (2π)^{−(c−1)/2} σ^{−(c−1)}`.
    fn f_pow(theta: &[f64], c: f64) -> f64 {
        let sigma = theta[1];
        let b = c - 1.0;
        1.0 / (fmath::sqrt(c) * fmath::powf(2.0 * core::f64::consts::PI, b / 2.0) * fmath::powf(sigma, b))
    }
}

impl ParametricModel for NormalModel {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &'static str {
        "normal"
    }

    fn support(&self) -> Domain {
        Domain::RealLine
    }

    fn in_support(&self, x: f64) -> bool {
        x.is_finite()
    }

    fn in_domain(&self, theta: &[f64]) -> bool {
        theta.len() == 2 && theta[0].is_finite() && theta[1].is_finite() && theta[1] > 0.0
    }

    fn positive_params(&self) -> &'static [bool] {
        &[false, true]
    }

    fn log_density(&self, theta: &[f64], x: f64) -> f64 {
        let (mu, sigma) = (theta[0], theta[1]);
        let z = (x - mu) / sigma;
        -0.5 * LN_2PI - fmath::ln(sigma) - 0.5 * z * z
    }

    fn score(&self, theta: &[f64], x: f64) -> Vec<f64> {
        let (mu, sigma) = (theta[0], theta[1]);
        let z = (x - mu) / sigma;
        alloc::vec![z / sigma, (z * z - 1.0) / sigma]
    }

    fn information(&self, theta: &[f64], x: f64) -> Mat {
        let (mu, sigma) = (theta[0], theta[1]);
        let z = (x - mu) / sigma;
        let s2 = sigma * sigma;
        Mat::from_vec(
            2,
            2,
            alloc::vec![1.0 / s2, 2.0 * z / s2, 2.0 * z / s2, (3.0 * z * z - 1.0) / s2],
        )
    }

    fn standardize(&self, theta: &[f64]) -> (f64, f64) {
        (theta[0], theta[1])
    }

    fn int_f_pow(&self, theta: &[f64], c: f64) -> Option<Result<f64>> {
        Some(Ok(Self::f_pow(theta, c)))
    }

    fn int_score_f_pow(&self, theta: &[f64], c: f64) -> Option<Result<Vec<f64>>> {
        // ∫ u f^c dx = (0, −b·(2π)^{−b/2} σ^{−(1+b)} c^{−3/2})ᵀ with b = c−1:
        // the location component vanishes by symmetry; only the scale score
        // picks up the non-normalized mass of f^c.
        let sigma = theta[1];
        let b = c - 1.0;
        let second = -b
            / (fmath::powf(2.0 * core::f64::consts::PI, b / 2.0)
                * fmath::powf(sigma, 1.0 + b)
                * fmath::powf(c, 1.5));
        Some(Ok(alloc::vec![0.0, second]))
    }

    fn int_score_outer_f_pow(&self, theta: &[f64], c: f64) -> Option<Result<Mat>> {
        // ∫ u uᵀ f^c dx = κ · diag(1/c, (b²+2)/c²) with b = c−1 and
        // κ = c^{−1/2}(2π)^{−b/2} σ^{−(2+b)}.
        let sigma = theta[1];
        let b = c - 1.0;
        let kappa = 1.0
            / (fmath::sqrt(c)
                * fmath::powf(2.0 * core::f64::consts::PI, b / 2.0)
                * fmath::powf(sigma, 2.0 + b));
        let m = Mat::from_vec(
            2,
            2,
            alloc::vec![kappa / c, 0.0, 0.0, kappa * (b * b + 2.0) / (c * c)],
        );
        Some(Ok(m))
    }

    fn int_cross_pow(&self, theta1: &[f64], theta2: &[f64], gamma: f64) -> Option<Result<f64>> {
        // ∫ f_{θ2}^γ f_{θ1} dx =
        //   (2π)^{−γ/2} σ₂^{1−γ} (σ₂² + γσ₁²)^{−1/2} exp(−γ(μ₁−μ₂)²/(2(σ₂²+γσ₁²))).
        let (mu1, s1) = (theta1[0], theta1[1]);
        let (mu2, s2) = (theta2[0], theta2[1]);
        let denom = s2 * s2 + gamma * s1 * s1;
        let d = mu1 - mu2;
        let v = fmath::powf(2.0 * core::f64::consts::PI, -gamma / 2.0)
            * fmath::powf(s2, 1.0 - gamma)
            / fmath::sqrt(denom)
            * fmath::exp(-gamma * d * d / (2.0 * denom));
        Some(Ok(v))
    }

    fn kl_divergence(&self, theta1: &[f64], theta2: &[f64]) -> Option<Result<f64>> {
        let (mu1, s1) = (theta1[0], theta1[1]);
        let (mu2, s2) = (theta2[0], theta2[1]);
        let d = mu1 - mu2;
        Some(Ok(fmath::ln(s2 / s1) - 0.5 + (s1 * s1) / (2.0 * s2 * s2) + d * d / (2.0 * s2 * s2)))
    }

    fn sample(&self, theta: &[f64], rng: &mut RngStream) -> f64 {
        theta[0] + theta[1] * rng.next_gaussian()
    }

    fn moment_start(&self, data: &[f64]) -> Vec<f64> {
        let sd = pop_sd(data);
        alloc::vec![mean(data), sd.max(1e-12)]
    }

    fn robust_start(&self, data: &[f64]) -> Vec<f64> {
        let scale = 1.4826 * mad(data);
        let scale = if scale > 0.0 { scale } else { pop_sd(data).max(1e-12) };
        alloc::vec![median(data), scale]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::integrals;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn log_density_at_origin() {
        let m = NormalModel;
        assert_relative_eq!(
            m.density(&[0.0, 1.0], 0.0),
            1.0 / fmath::sqrt(2.0 * core::f64::consts::PI),
            max_relative = 1e-15
        );
        assert_eq!(m.density(&[0.0, 1.0], f64::INFINITY), 0.0);
    }

    #[test]
    fn cross_pow_reduces_to_f_pow() {
        // θ1 = θ2 collapses ψ_γ to ∫ f^{1+γ}.
        let m = NormalModel;
        let theta = [0.3, 1.7];
        for gamma in [0.1, 0.5, 1.0] {
            let psi = integrals::cross_pow(&m, &theta, &theta, gamma).unwrap();
            let fp = integrals::f_pow(&m, &theta, 1.0 + gamma).unwrap();
            assert_relative_eq!(psi, fp, max_relative = 1e-13);
        }
    }

    #[test]
    fn cross_pow_matches_quadrature() {
        let m = NormalModel;
        let t1 = [0.5, 1.2];
        let t2 = [-0.3, 0.8];
        for gamma in [0.25, 0.6, 1.0] {
            let closed = integrals::cross_pow(&m, &t1, &t2, gamma).unwrap();
            let quad = crate::numerics::quadrature::integrate(
                |x| fmath::powf(m.density(&t2, x), gamma) * m.density(&t1, x),
                &crate::numerics::QuadratureSpec::with_domain(Domain::RealLine),
            )
            .unwrap();
            assert_relative_eq!(closed, quad, max_relative = 1e-8);
        }
    }

    #[test]
    fn kl_closed_form() {
        // KL(N(0,1) ‖ N(1,1)) = 1/2.
        let m = NormalModel;
        let v = integrals::kl(&m, &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-14);
        // Self-divergence is zero.
        assert_abs_diff_eq!(integrals::kl(&m, &[2.0, 3.0], &[2.0, 3.0]).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sampling_matches_moments() {
        let m = NormalModel;
        let mut rng = RngStream::new(5, 1);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| m.sample(&[1.5, 2.0], &mut rng)).collect();
        assert_abs_diff_eq!(mean(&xs), 1.5, epsilon = 0.02);
        assert_abs_diff_eq!(pop_sd(&xs), 2.0, epsilon = 0.02);
    }

    #[test]
    fn starts_are_sane() {
        let m = NormalModel;
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 100.0];
        let ms = m.moment_start(&data);
        let rs = m.robust_start(&data);
        // The outlier drags the moment start but not the robust one.
        assert!(ms[0] > 15.0);
        assert!(rs[0] < 4.0);
        assert!(rs[1] > 0.0 && rs[1] < ms[1]);
    }
}
