//! Property-based checks of the library's structural invariants:
//! divergence axioms, estimator equivariance and stationarity, mixture
//! calibration monotonicity, spectrum positivity, and sampling support.

use dpd_core::asymptotics::{normal_location_eigenvalue, null_spectrum};
use dpd_core::divergence::{dpd, Dataset};
use dpd_core::estimation::{fit_mdpde, fit_rmdpde, GRAD_TOL};
use dpd_core::models::{integrals, ConstraintSpec, NormalModel, ParametricModel, WeibullModel};
use dpd_core::numerics::rng::RngStream;
use dpd_core::testing::{
    mixture_pvalue, mixture_quantile, t_test, Alternative, ChiSquareMixture,
};
use proptest::prelude::*;

fn normal_theta() -> impl Strategy<Value = Vec<f64>> {
    (-3.0..3.0f64, 0.3..3.0f64).prop_map(|(m, s)| vec![m, s])
}

fn weibull_theta() -> impl Strategy<Value = Vec<f64>> {
    (0.5..3.0f64, 0.8..3.0f64).prop_map(|(s, p)| vec![s, p])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// d_γ(h, f) ≥ 0 with equality exactly on the diagonal.
    #[test]
    fn divergence_is_nonnegative_and_separates(
        t1 in normal_theta(),
        t2 in normal_theta(),
        gamma in 0.0..1.0f64,
    ) {
        let d = dpd(&NormalModel, &t1, &t2, gamma).unwrap();
        prop_assert!(d >= -1e-12, "negative divergence {d}");
        let gap = (t1[0] - t2[0]).abs().max((t1[1] - t2[1]).abs());
        if gap > 0.05 {
            prop_assert!(d > 1e-8, "separation failed at gap {gap}: d = {d}");
        }
        let zero = dpd(&NormalModel, &t1, &t1, gamma).unwrap();
        prop_assert!(zero.abs() <= 1e-12, "d(theta, theta) = {zero}");
    }

    /// Same axioms on the Weibull family.
    #[test]
    fn weibull_divergence_axioms(
        t1 in weibull_theta(),
        t2 in weibull_theta(),
        gamma in 0.0..0.8f64,
    ) {
        let d = dpd(&WeibullModel, &t1, &t2, gamma).unwrap();
        prop_assert!(d >= -1e-10, "negative divergence {d}");
        let zero = dpd(&WeibullModel, &t1, &t1, gamma).unwrap();
        prop_assert!(zero.abs() <= 1e-10, "d(theta, theta) = {zero}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Location-scale equivariance: fitting a + s·x moves the estimate to
    /// (a + s·μ̂, s·σ̂).
    #[test]
    fn mdpde_is_affine_equivariant(
        shift in -5.0..5.0f64,
        scale in 0.25..4.0f64,
        beta in 0.0..0.6f64,
    ) {
        let base = [-1.2, -0.4, 0.1, 0.8, 2.0, 0.3, -0.7, 1.5];
        let data = Dataset::new(base.to_vec(), "base").unwrap();
        let moved = Dataset::new(
            base.iter().map(|x| shift + scale * x).collect(),
            "moved",
        ).unwrap();
        let fit = fit_mdpde(&NormalModel, &data, beta, None).unwrap();
        let fit_moved = fit_mdpde(&NormalModel, &moved, beta, None).unwrap();
        let want_mu = shift + scale * fit.theta_hat[0];
        let want_sigma = scale * fit.theta_hat[1];
        prop_assert!((fit_moved.theta_hat[0] - want_mu).abs() <= 1e-5 * (1.0 + want_mu.abs()));
        prop_assert!((fit_moved.theta_hat[1] - want_sigma).abs() <= 1e-5 * (1.0 + want_sigma));
    }

    /// The restricted fit satisfies its pins exactly and the unrestricted
    /// fit is stationary.
    #[test]
    fn fits_are_stationary_and_pins_hold(
        seed in 1u64..5000,
        beta in 0.0..0.5f64,
        pin_mu in -2.0..2.0f64,
    ) {
        let mut stream = RngStream::new(seed, 0);
        let values: Vec<f64> = (0..40).map(|_| 0.4 + 1.3 * stream.next_gaussian()).collect();
        let data = Dataset::new(values, "draw").unwrap();
        let fit = fit_mdpde(&NormalModel, &data, beta, None).unwrap();
        prop_assume!(fit.converged);
        prop_assert!(fit.gradient_norm <= GRAD_TOL);

        let constraint = ConstraintSpec::pin(0, pin_mu, "mu pinned");
        let restricted = fit_rmdpde(&NormalModel, &data, beta, &constraint, None).unwrap();
        prop_assert_eq!(restricted.theta_hat[0], pin_mu);
        prop_assert!(restricted.objective_value >= fit.objective_value - 1e-12);
        prop_assert!(restricted.lagrange_multipliers.is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Quantiles decrease in α, p-values decrease in t, and both stay in
    /// range; the mixture mean matches Σλ.
    #[test]
    fn mixture_calibration_is_monotone(
        weights in proptest::collection::vec(0.1..3.0f64, 1..4),
        t in 0.05..30.0f64,
    ) {
        let mix = ChiSquareMixture::new(weights.clone(), 50_000, 99).unwrap();
        let q01 = mixture_quantile(&mix, 0.01).unwrap();
        let q05 = mixture_quantile(&mix, 0.05).unwrap();
        let q20 = mixture_quantile(&mix, 0.20).unwrap();
        prop_assert!(q01 >= q05 && q05 >= q20, "quantiles not monotone: {q01} {q05} {q20}");
        let p_lo = mixture_pvalue(&mix, t).unwrap();
        let p_hi = mixture_pvalue(&mix, t + 1.0).unwrap();
        prop_assert!(p_lo >= p_hi, "p-value increased in t");
        prop_assert!(p_lo > 0.0 && p_lo <= 1.0);
        let lambda_sum: f64 = weights.iter().sum();
        prop_assert!((mix.mean() - lambda_sum).abs() <= 1e-12);
    }

    /// Positive-homogeneity of the mixture law: quantiles scale linearly
    /// and exceedance probabilities are scale-invariant.
    #[test]
    fn mixture_scaling_is_homogeneous(
        weights in proptest::collection::vec(0.2..2.0f64, 1..4),
        c in 0.1..8.0f64,
        t in 0.5..10.0f64,
    ) {
        let base = ChiSquareMixture::new(weights.clone(), 100_000, 7).unwrap();
        let scaled_weights: Vec<f64> = weights.iter().map(|w| c * w).collect();
        let scaled = ChiSquareMixture::new(scaled_weights, 100_000, 7).unwrap();
        let q = mixture_quantile(&base, 0.05).unwrap();
        let qc = mixture_quantile(&scaled, 0.05).unwrap();
        prop_assert!((qc - c * q).abs() <= 1e-10 * (1.0 + c * q));
        let p = mixture_pvalue(&base, t).unwrap();
        let pc = mixture_pvalue(&scaled, c * t).unwrap();
        prop_assert!((p - pc).abs() <= 5e-5, "scale invariance broke: {p} vs {pc}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Student t baseline: p-values are proper probabilities, the two
    /// one-sided tests are complementary, and the two-sided p doubles the
    /// smaller tail.
    #[test]
    fn t_test_tail_algebra(
        seed in 1u64..4000,
        n in 3usize..40,
        mu0 in -5.0..5.0f64,
    ) {
        let mut stream = RngStream::new(seed, 1);
        let values: Vec<f64> = (0..n).map(|_| stream.next_gaussian() * 2.0 - 0.5).collect();
        let data = Dataset::new(values, "draw").unwrap();
        let two = t_test(&data, mu0, Alternative::TwoSided, 0.05).unwrap();
        let hi = t_test(&data, mu0, Alternative::Greater, 0.05).unwrap();
        let lo = t_test(&data, mu0, Alternative::Less, 0.05).unwrap();
        for p in [two.p_value, hi.p_value, lo.p_value] {
            prop_assert!(p > 0.0 && p <= 1.0);
        }
        prop_assert!((hi.p_value + lo.p_value - 1.0).abs() <= 1e-12);
        let doubled = 2.0 * hi.p_value.min(lo.p_value);
        prop_assert!((two.p_value - doubled).abs() <= 1e-12);
        prop_assert_eq!(two.reject(), two.p_value <= two.alpha);
    }

    /// The scalar-pin null spectrum is strictly positive, and the location
    /// pin reproduces the closed-form eigenvalue.
    #[test]
    fn pin_spectra_are_positive_and_match_the_closed_form(
        sigma in 0.5..2.5f64,
        beta in 0.0..1.0f64,
        gamma in 0.0..1.0f64,
        coord in 0usize..2,
    ) {
        let theta = [0.3, sigma];
        let constraint = ConstraintSpec::pin(coord, theta[coord], "pin");
        let spec = null_spectrum(&NormalModel, &theta, beta, gamma, &constraint).unwrap();
        prop_assert_eq!(spec.eigenvalues.len(), 1);
        prop_assert!(spec.eigenvalues[0] > 0.0);
        if coord == 0 {
            let closed = normal_location_eigenvalue(beta, gamma, sigma);
            let rel = (spec.eigenvalues[0] - closed).abs() / closed;
            prop_assert!(rel <= 1e-6, "closed form off by {rel:.2e}");
        }
    }

    /// Weibull draws live on the positive half-line and the density the
    /// quadrature sees integrates to one.
    #[test]
    fn weibull_sampling_and_mass(theta in weibull_theta(), seed in 1u64..3000) {
        let mut stream = RngStream::new(seed, 2);
        for _ in 0..50 {
            let x = WeibullModel.sample(&theta, &mut stream);
            prop_assert!(x > 0.0 && WeibullModel.in_support(x));
        }
        let mass = integrals::expect_under(&WeibullModel, &theta, |_| 1.0).unwrap();
        prop_assert!((mass - 1.0).abs() <= 1e-8, "density mass = {mass}");
    }
}
