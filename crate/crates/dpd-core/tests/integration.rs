//! Cross-module checks: the analytic power approximation against the
//! Monte Carlo harness, and an end-to-end tune → fit → test workflow.

use dpd_core::divergence::Dataset;
use dpd_core::estimation::{fit_mdpde, fit_rmdpde};
use dpd_core::models::{ConstraintSpec, NormalModel, ParametricModel};
use dpd_core::power::approximate_power;
use dpd_core::simulation::{run_experiment, ExperimentPlan, MixtureScenario};
use dpd_core::testing::dpd_test;
use dpd_core::tuning::{select_beta, TuningConfig};

fn empirical_power(theta_star: [f64; 2], beta: f64, n: usize, reps: u32, seed: u64) -> f64 {
    let scenario =
        MixtureScenario::pure(&NormalModel, theta_star.to_vec(), "alternative").unwrap();
    let plan = ExperimentPlan {
        scenario,
        model: &NormalModel,
        hypothesis: ConstraintSpec::pin(0, 0.0, "mu = 0"),
        betas: vec![beta],
        sample_sizes: vec![n],
        replications: reps,
        alpha: 0.05,
        master_seed: seed,
        baseline_t: false,
    };
    run_experiment(&plan).unwrap().rows[0].rate
}

/// The delta-method power formula tracks the simulated rejection rate at a
/// moderate alternative, both in the likelihood corner and at a robust β.
#[test]
fn approximate_power_tracks_simulation() {
    let constraint = ConstraintSpec::pin(0, 0.0, "mu = 0");
    for (beta, n, reps) in [(0.0, 44, 1500), (0.25, 100, 800)] {
        let theta_star = [0.3, 1.0];
        let approx = approximate_power(
            &NormalModel,
            &theta_star,
            &constraint,
            beta,
            beta,
            n as u64,
            0.05,
            10_000,
            5,
        )
        .unwrap();
        let empirical = empirical_power(theta_star, beta, n, reps, 31);
        assert!(
            (approx - empirical).abs() <= 0.1,
            "beta = {beta}, n = {n}: approximation {approx} vs simulation {empirical}"
        );
    }
}

/// Contaminated-sample workflow: tuning picks a positive β, the robust fit
/// shakes off the outliers the MLE absorbs, and the test keeps its verdict
/// stable.
#[test]
fn tune_fit_test_workflow() {
    // A clean N(0.2, 1) sample with a far cluster at -8.
    let mut values = vec![
        -1.31, -0.84, -0.62, -0.41, -0.30, -0.17, -0.05, 0.04, 0.13, 0.22, 0.31, 0.40, 0.52,
        0.64, 0.78, 0.95, 1.12, 1.38, 1.74, 2.10,
    ];
    for v in values.iter_mut() {
        *v += 0.2;
    }
    let core_mean = values.iter().sum::<f64>() / values.len() as f64;
    values.extend([-8.1, -7.9, -8.3]);
    let data = Dataset::new(values, "contaminated").unwrap();

    let tuned = select_beta(&NormalModel, &data, &TuningConfig::default()).unwrap();
    assert!(tuned.beta_opt > 0.0, "contamination should force downweighting");

    let mle = fit_mdpde(&NormalModel, &data, 0.0, None).unwrap();
    let robust = fit_mdpde(&NormalModel, &data, tuned.beta_opt, None).unwrap();
    assert!(
        robust.theta_hat[1] < 0.6 * mle.theta_hat[1],
        "robust scale {} should shed the outlier inflation of the MLE scale {}",
        robust.theta_hat[1],
        mle.theta_hat[1]
    );
    assert!((robust.theta_hat[0] - core_mean).abs() < 0.15);

    // H0: mu at the core mean is true for the clean part; the robust test
    // keeps it.
    let keep = ConstraintSpec::pin(0, core_mean, "mu at core mean");
    let test =
        dpd_test(&NormalModel, &data, tuned.beta_opt, tuned.beta_opt, &keep, 0.05, 100_000, 9)
            .unwrap();
    assert!(!test.reject(), "robust test rejected a true core null (p = {})", test.p_value);

    // And the restricted fit under that pin stays consistent with it.
    let restricted = fit_rmdpde(&NormalModel, &data, tuned.beta_opt, &keep, None).unwrap();
    assert_eq!(restricted.theta_hat[0], core_mean);
    assert!(restricted.converged);
}

/// The Weibull path end to end: simulate, fit both ways, test the true
/// null at the robust β, and confirm the level-scale verdict.
#[test]
fn weibull_end_to_end() {
    use dpd_core::models::WeibullModel;
    use dpd_core::numerics::rng::RngStream;

    let mut stream = RngStream::new(8080, 0);
    let truth = [1.5, 1.5];
    let values: Vec<f64> = (0..150).map(|_| WeibullModel.sample(&truth, &mut stream)).collect();
    let data = Dataset::new(values, "weibull draw").unwrap();

    let fit = fit_mdpde(&WeibullModel, &data, 0.25, None).unwrap();
    assert!(fit.converged);
    assert!((fit.theta_hat[0] - 1.5).abs() < 0.3 && (fit.theta_hat[1] - 1.5).abs() < 0.4);

    let constraint = ConstraintSpec::pin(0, 1.5, "sigma = 1.5");
    let test = dpd_test(&WeibullModel, &data, 0.25, 0.25, &constraint, 0.05, 100_000, 3).unwrap();
    assert!(test.p_value > 0.05, "true Weibull null rejected with p = {}", test.p_value);
    assert_eq!(test.eigenvalues.len(), 1);
}
