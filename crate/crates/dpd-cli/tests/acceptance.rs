//! Acceptance suite: one pass/fail line per criterion, nonzero exit when
//! any criterion fails. Each criterion carries a runtime budget; all
//! Monte Carlo work runs on the library's deterministic streams, so a
//! rerun prints identical numbers.
//!
//! Run directly with `cargo test -p dpd-cli --test acceptance`.

use std::panic::catch_unwind;
use std::time::Instant;

use dpd_core::asymptotics::{constrained_matrices, null_spectrum};
use dpd_core::divergence::{dpd, Dataset};
use dpd_core::estimation::{fit_mdpde, fit_rmdpde};
use dpd_core::models::{integrals, ConstraintSpec, NormalModel, ParametricModel, WeibullModel};
use dpd_core::numerics::special::{chi2_1_quantile, normal_cdf, normal_sf};
use dpd_core::numerics::{Mat, RngStream};
use dpd_core::power::contiguous_distribution;
use dpd_core::simulation::{run_experiment, ExperimentPlan, MixtureScenario};
use dpd_core::testing::{
    dpd_test, mixture_pvalue, mixture_quantile, signed_one_sided_test, t_test, Alternative,
    ChiSquareMixture,
};
use dpd_core::tuning::{select_beta, TuningConfig};

const SEED: u64 = 24601;

fn data(name: &str) -> Dataset {
    dpd_cli::datasets::load_builtin(name).expect("built-in exists").to_dataset()
}

fn mu_pin() -> ConstraintSpec {
    ConstraintSpec::pin(0, 0.0, "mu = 0")
}

/// Criterion 1: the single mixture weight of the location-pinned normal
/// null matches the closed form (β+1)³/(σ^γ √(γ+1) (2β+1)^{3/2} (2π)^{γ/2})
/// on the full (β, γ, σ) grid, and equals 1 exactly at β = γ = 0.
fn c1_normal_eigenvalue() -> Result<String, String> {
    let model = NormalModel;
    let mut checked = 0;
    for beta in [0.0, 0.25, 0.5, 1.0] {
        for gamma in [0.0, 0.25, 0.5, 1.0] {
            for sigma in [0.5, 1.0, 2.0] {
                let spectrum = null_spectrum(&model, &[0.0, sigma], beta, gamma, &mu_pin())
                    .map_err(|e| e.to_string())?;
                if spectrum.eigenvalues.len() != 1 {
                    return Err(format!(
                        "expected one eigenvalue, got {:?}",
                        spectrum.eigenvalues
                    ));
                }
                let lambda = spectrum.eigenvalues[0];
                let closed = (beta + 1.0).powi(3)
                    / (sigma.powf(gamma)
                        * (gamma + 1.0).sqrt()
                        * (2.0 * beta + 1.0).powf(1.5)
                        * (2.0 * std::f64::consts::PI).powf(gamma / 2.0));
                let rel = (lambda - closed).abs() / closed.abs();
                if rel > 1e-6 {
                    return Err(format!(
                        "β={beta} γ={gamma} σ={sigma}: eigenvalue {lambda} vs closed form \
                         {closed} (relative error {rel:.2e})"
                    ));
                }
                if beta == 0.0 && gamma == 0.0 && (lambda - 1.0).abs() > 1e-10 {
                    return Err(format!("β=γ=0, σ={sigma}: eigenvalue {lambda} ≠ 1"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} grid points within 1e-6 relative"))
}

/// Criterion 2: at β = γ = 0 the statistic collapses to the likelihood
/// ratio n·log(σ̃²/σ̂²) on both datasets.
fn c2_lrt_identity() -> Result<String, String> {
    let model = NormalModel;
    let mut details = Vec::new();
    for name in ["telephone", "darwin"] {
        let ds = data(name);
        let result = dpd_test(&model, &ds, 0.0, 0.0, &mu_pin(), 0.05, 10_000, SEED)
            .map_err(|e| e.to_string())?;
        let n = ds.n() as f64;
        let lrt = n * (result.theta_tilde[1].powi(2) / result.theta_hat[1].powi(2)).ln();
        let gap = (result.statistic - lrt).abs();
        if gap > 1e-8 {
            return Err(format!(
                "{name}: T = {} vs n·log(σ̃²/σ̂²) = {lrt} (|Δ| = {gap:.2e})",
                result.statistic
            ));
        }
        details.push(format!("{name} |Δ| = {gap:.1e}"));
    }
    Ok(details.join(", "))
}

/// Criterion 3: two-sided one-sample t-test p-values against the
/// reference analysis, matched to 4 decimals.
fn c3_t_test_pvalues() -> Result<String, String> {
    // (dataset, reference p, tolerance). The first three compare at 4
    // decimal places; the last is quoted to 4 significant figures.
    let cases = [
        ("telephone", 0.6584, 0.00005),
        ("telephone_cleaned", 0.0076, 0.00005),
        ("darwin", 0.0497, 0.00005),
        ("darwin_cleaned", 1.3119e-4, 1.3119e-4 * 5e-5 / 1e-4),
    ];
    let mut details = Vec::new();
    let mut failures = Vec::new();
    for (name, reference, tolerance) in cases {
        let p = t_test(&data(name), 0.0, Alternative::TwoSided, 0.05)
            .map_err(|e| e.to_string())?
            .p_value;
        details.push(format!("{name} p = {p:.6}"));
        if (p - reference).abs() > tolerance {
            failures.push(format!("{name}: computed {p:.6}, reference {reference}"));
        }
    }
    if failures.is_empty() {
        Ok(details.join(", "))
    } else {
        let mut message = failures.join("; ");
        if failures.iter().any(|f| f.starts_with("telephone")) {
            // Independent software agrees with our computed values on the
            // listed data (sum 565, thirteenth entry 289). The tabulated
            // references reproduce exactly — 0.65842 and 0.00762 — when
            // that entry reads 269, so the reference table appears to have
            // been computed from a variant of the data that contradicts
            // the listing this suite is required to use.
            message.push_str(
                "; note: both tabulated telephone values reproduce exactly if the data entry \
                 289 reads 269, indicating a digit discrepancy between the reference table \
                 and the data listing",
            );
        }
        Err(message)
    }
}

/// Criterion 4: one-sided signed-divergence p-values (normal and
/// t-corrected routes) against the reference tables, ±0.0015 each.
fn c4_one_sided_pvalues() -> Result<String, String> {
    let model = NormalModel;
    // (dataset, β, reference Z p-value if tabulated, reference t p-value)
    let cases: [(&str, f64, Option<f64>, f64); 8] = [
        ("telephone", 0.15, Some(0.0006), 0.0032),
        ("telephone_cleaned", 0.15, Some(0.0019), 0.0068),
        ("telephone", 0.3, Some(0.0013), 0.0050),
        ("telephone_cleaned", 0.3, Some(0.0017), 0.0064),
        ("darwin", 0.15, Some(0.0081), 0.0153),
        ("darwin", 0.3, Some(0.0017), 0.0055),
        // The deleted-data Darwin rows tabulate only the t route; the
        // normal-route p-values fall below 1e-4.
        ("darwin_cleaned", 0.15, None, 0.0008),
        ("darwin_cleaned", 0.3, None, 0.0009),
    ];
    let mut failures = Vec::new();
    for (name, beta, z_reference, t_reference) in cases {
        let r = signed_one_sided_test(
            &model,
            &data(name),
            beta,
            beta,
            0.0,
            Alternative::Greater,
            0.05,
        )
        .map_err(|e| e.to_string())?;
        match z_reference {
            Some(z_ref) => {
                if (r.z.p_value - z_ref).abs() > 0.0015 {
                    failures.push(format!(
                        "{name} β={beta}: Z p-value {:.4} vs reference {z_ref}",
                        r.z.p_value
                    ));
                }
            }
            None => {
                if r.z.p_value >= 1e-4 {
                    failures.push(format!(
                        "{name} β={beta}: Z p-value {:.6} not below 1e-4",
                        r.z.p_value
                    ));
                }
            }
        }
        if (r.t_p_value - t_reference).abs() > 0.0015 {
            failures.push(format!(
                "{name} β={beta}: t p-value {:.4} vs reference {t_reference}",
                r.t_p_value
            ));
        }
    }
    if failures.is_empty() {
        Ok("8 table entries within ±0.0015".to_string())
    } else {
        Err(failures.join("; "))
    }
}

/// Criterion 5: the MSE tuning rule lands on the reference β* for both
/// datasets at grid step 0.01.
fn c5_tuning() -> Result<String, String> {
    let model = NormalModel;
    let config = TuningConfig::default();
    let mut details = Vec::new();
    for (name, reference, tolerance) in
        [("telephone", 0.1919, 0.03), ("darwin", 0.5657, 0.06)]
    {
        let result = select_beta(&model, &data(name), &config).map_err(|e| e.to_string())?;
        if (result.beta_opt - reference).abs() > tolerance {
            return Err(format!(
                "{name}: β* = {} vs reference {reference} ± {tolerance}",
                result.beta_opt
            ));
        }
        details.push(format!("{name} β* = {}", result.beta_opt));
    }
    Ok(details.join(", "))
}

/// Criterion 6: mixture quantiles against analytic chi-square values.
fn c6_mixture_quantiles() -> Result<String, String> {
    let one = ChiSquareMixture::new(vec![1.0], 1_000_000, SEED).map_err(|e| e.to_string())?;
    let q1 = mixture_quantile(&one, 0.05).map_err(|e| e.to_string())?;
    if (q1 - 3.8415).abs() > 0.02 {
        return Err(format!("quantile for weights (1): {q1} vs 3.8415 ± 0.02"));
    }
    let two =
        ChiSquareMixture::new(vec![1.0, 1.0], 1_000_000, SEED).map_err(|e| e.to_string())?;
    let q2 = mixture_quantile(&two, 0.05).map_err(|e| e.to_string())?;
    if (q2 - 5.9915).abs() > 0.03 {
        return Err(format!("quantile for weights (1,1): {q2} vs 5.9915 ± 0.03"));
    }
    Ok(format!("q(1) = {q1:.4}, q(1,1) = {q2:.4}"))
}

/// Criterion 7: observed level under pure N(0,1) stays in [0.03, 0.08]
/// for every (n, β) cell at nominal 0.05.
fn c7_level_pure_normal() -> Result<String, String> {
    let model = NormalModel;
    let plan = ExperimentPlan {
        scenario: MixtureScenario::pure(&model, vec![0.0, 1.0], "N(0,1)")
            .map_err(|e| e.to_string())?,
        model: &model,
        hypothesis: mu_pin(),
        betas: vec![0.0, 0.15, 0.25],
        sample_sizes: vec![30, 100],
        replications: 2000,
        alpha: 0.05,
        master_seed: SEED,
        baseline_t: false,
    };
    let table = run_experiment(&plan).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    for row in &table.rows {
        if !(0.03..=0.08).contains(&row.rate) {
            return Err(format!(
                "n={} β={:?}: level {} outside [0.03, 0.08]",
                row.n, row.beta, row.rate
            ));
        }
        details.push(format!("n={} β={} → {:.3}", row.n, row.beta.unwrap_or(f64::NAN), row.rate));
    }
    Ok(details.join(", "))
}

/// Criterion 8: contamination breaks the β = 0 test (level explodes,
/// power collapses) while β = 0.25 stays stable.
fn c8_contamination() -> Result<String, String> {
    let model = NormalModel;
    let run = |core_mu: f64, label: &str| -> Result<Vec<f64>, String> {
        let plan = ExperimentPlan {
            scenario: MixtureScenario::new(
                vec![(&model, vec![core_mu, 1.0]), (&model, vec![-10.0, 1.0])],
                vec![0.9, 0.1],
                label,
            )
            .map_err(|e| e.to_string())?,
            model: &model,
            hypothesis: mu_pin(),
            betas: vec![0.0, 0.25],
            sample_sizes: vec![100],
            replications: 2000,
            alpha: 0.05,
            master_seed: SEED,
            baseline_t: false,
        };
        let table = run_experiment(&plan).map_err(|e| e.to_string())?;
        Ok(table.rows.iter().map(|r| r.rate).collect())
    };

    let level = run(0.0, "0.9 N(0,1) + 0.1 N(-10,1)")?;
    if level[0] < 0.5 {
        return Err(format!("contaminated level at β=0 is {} (< 0.5 expected)", level[0]));
    }
    if level[1] > 0.12 {
        return Err(format!("contaminated level at β=0.25 is {} (> 0.12)", level[1]));
    }
    let power = run(1.0, "0.9 N(1,1) + 0.1 N(-10,1)")?;
    if power[1] < 0.8 {
        return Err(format!("contaminated power at β=0.25 is {} (< 0.8)", power[1]));
    }
    if power[0] > 0.2 {
        return Err(format!(
            "contaminated power at β=0 is {} (> 0.2; breakdown expected)",
            power[0]
        ));
    }
    Ok(format!(
        "level β=0: {:.3}, β=0.25: {:.3}; power β=0: {:.3}, β=0.25: {:.3}",
        level[0], level[1], power[0], power[1]
    ))
}

/// Criterion 9: Weibull oracles — the Γ closed form of ξ, the ξ/η-built
/// score-moment matrix R_c, and the divergence itself each agree with
/// independent adaptive quadrature; the scale-pin test holds its level.
fn c9_weibull_suite() -> Result<String, String> {
    let model = WeibullModel;
    let grid = [0.8, 1.5, 2.5];
    let shapes = [1.1, 1.5, 2.2];

    // (a) ξ_{α,b} closed form vs quadrature, 1e-8 relative.
    for &sigma in &grid {
        for &p in &shapes {
            let theta = [sigma, p];
            for alpha in [0.0, p, 2.0 * p] {
                for b in [1.25, 1.5] {
                    let closed = dpd_core::models::weibull_xi(alpha, b, &theta)
                        .map_err(|e| e.to_string())?;
                    let quad = integrals::expect_under(&model, &theta, |x| {
                        (x / sigma).powf(alpha) * model.density(&theta, x).powf(b - 1.0)
                    })
                    .map_err(|e| e.to_string())?;
                    let rel = (closed - quad).abs() / quad.abs();
                    if rel > 1e-8 {
                        return Err(format!(
                            "ξ({alpha}, {b}) at (σ,p)=({sigma},{p}): closed {closed} vs \
                             quadrature {quad} (rel {rel:.2e})"
                        ));
                    }
                }
            }
        }
    }

    // (b) R_γ built from ξ/η vs entrywise quadrature, 1e-6 relative.
    let c = 1.25;
    for &sigma in &grid {
        for &p in &shapes {
            let theta = [sigma, p];
            let built = dpd_core::models::weibull_r(c, &theta).map_err(|e| e.to_string())?;
            for i in 0..2 {
                for j in 0..2 {
                    let quad = integrals::expect_under(&model, &theta, |x| {
                        let u = model.score(&theta, x);
                        u[i] * u[j] * model.density(&theta, x).powf(c - 1.0)
                    })
                    .map_err(|e| e.to_string())?;
                    let scale = quad.abs().max(1e-12);
                    if (built[(i, j)] - quad).abs() / scale > 1e-6 {
                        return Err(format!(
                            "R_{c}[{i}{j}] at (σ,p)=({sigma},{p}): {} vs quadrature {quad}",
                            built[(i, j)]
                        ));
                    }
                }
            }
        }
    }

    // (c) the divergence via the library route vs the raw defining
    // integral, 1e-7.
    let gamma = 0.5;
    let theta1 = [1.5, 1.5];
    let theta2 = [1.2, 1.5];
    let lib = dpd(&model, &theta1, &theta2, gamma).map_err(|e| e.to_string())?;
    let term1 = integrals::f_pow(&model, &theta2, 1.0 + gamma).map_err(|e| e.to_string())?;
    let term2 = integrals::expect_under(&model, &theta1, |x| {
        model.density(&theta2, x).powf(gamma)
    })
    .map_err(|e| e.to_string())?;
    let term3 = integrals::f_pow(&model, &theta1, 1.0 + gamma).map_err(|e| e.to_string())?;
    let raw = term1 - (1.0 + 1.0 / gamma) * term2 + term3 / gamma;
    if (lib - raw).abs() > 1e-7 * raw.abs().max(1.0) {
        return Err(format!("d_γ route {lib} vs raw quadrature {raw}"));
    }

    // (d) level of the scale-pin test on W(1.5, 1.5).
    let plan = ExperimentPlan {
        scenario: MixtureScenario::pure(&model, vec![1.5, 1.5], "W(1.5,1.5)")
            .map_err(|e| e.to_string())?,
        model: &model,
        hypothesis: ConstraintSpec::pin(0, 1.5, "sigma = 1.5"),
        betas: vec![0.25],
        sample_sizes: vec![100],
        replications: 1000,
        alpha: 0.05,
        master_seed: SEED,
        baseline_t: false,
    };
    let table = run_experiment(&plan).map_err(|e| e.to_string())?;
    let level = table.rows[0].rate;
    if !(0.02..=0.09).contains(&level) {
        return Err(format!("Weibull scale-pin level {level} outside [0.02, 0.09]"));
    }
    Ok(format!("ξ, R_c, d_γ oracles agree; level = {level:.3}"))
}

/// Criterion 10: empirical covariance of the estimators matches the
/// sandwich J⁻¹KJ⁻¹ (unrestricted) and PKP (restricted), entrywise
/// within 15%.
fn c10_covariance_laws() -> Result<String, String> {
    let model = NormalModel;
    let beta = 0.25;
    let theta0 = [0.0, 1.0];
    let n = 2000usize;
    let reps = 2000u32;

    let mats = constrained_matrices(&model, &theta0, beta, beta, &mu_pin())
        .map_err(|e| e.to_string())?;
    let j_inv = mats.j.inverse().map_err(|e| e.to_string())?;
    let sandwich = j_inv.matmul(&mats.k).matmul(&j_inv);
    let restricted_cov = &mats.constrained.as_ref().expect("constrained blocks").sigma;

    let mut emp_hat = Mat::zeros(2, 2);
    let mut emp_tilde = Mat::zeros(2, 2);
    let root_n = (n as f64).sqrt();
    for rep in 0..reps {
        let mut stream = RngStream::new(SEED, u64::from(rep));
        let values: Vec<f64> = (0..n).map(|_| model.sample(&theta0, &mut stream)).collect();
        let ds = Dataset::new(values, "replicate").map_err(|e| e.to_string())?;
        let hat = fit_mdpde(&model, &ds, beta, None).map_err(|e| e.to_string())?.theta_hat;
        let tilde = fit_rmdpde(&model, &ds, beta, &mu_pin(), None)
            .map_err(|e| e.to_string())?
            .theta_hat;
        for i in 0..2 {
            for j in 0..2 {
                emp_hat[(i, j)] +=
                    root_n * (hat[i] - theta0[i]) * root_n * (hat[j] - theta0[j]);
                emp_tilde[(i, j)] +=
                    root_n * (tilde[i] - theta0[i]) * root_n * (tilde[j] - theta0[j]);
            }
        }
    }
    emp_hat = emp_hat.scale(1.0 / f64::from(reps));
    emp_tilde = emp_tilde.scale(1.0 / f64::from(reps));

    // Entrywise 15%: relative on the diagonal, and against the geometric
    // diagonal scale off it (those entries are zero in theory).
    let check = |emp: &Mat, theory: &Mat, label: &str| -> Result<(), String> {
        for i in 0..2 {
            for j in 0..2 {
                let scale = (theory[(i, i)] * theory[(j, j)]).sqrt().max(1e-12);
                let gap = (emp[(i, j)] - theory[(i, j)]).abs();
                if gap > 0.15 * scale.max(theory[(i, j)].abs()) {
                    return Err(format!(
                        "{label}[{i}{j}]: empirical {} vs theory {} (scale {scale})",
                        emp[(i, j)],
                        theory[(i, j)]
                    ));
                }
            }
        }
        Ok(())
    };
    check(&emp_hat, &sandwich, "J⁻¹KJ⁻¹")?;
    check(&emp_tilde, restricted_cov, "PKP")?;
    Ok(format!(
        "diag(J⁻¹KJ⁻¹) = ({:.4}, {:.4}) vs empirical ({:.4}, {:.4}); \
         PKP₂₂ = {:.4} vs empirical {:.4}",
        sandwich[(0, 0)],
        sandwich[(1, 1)],
        emp_hat[(0, 0)],
        emp_hat[(1, 1)],
        restricted_cov[(1, 1)],
        emp_tilde[(1, 1)]
    ))
}

/// Criterion 11: the contiguous-alternative law at β = γ = 0 under a
/// location pin reproduces noncentral χ²(1) exceedance probabilities.
fn c11_contiguous() -> Result<String, String> {
    let model = NormalModel;
    let sigma = 1.3;
    let delta = 0.9;
    let spec = contiguous_distribution(&model, &[0.0, sigma], &[delta, 0.0], 0.0, 0.0, &mu_pin())
        .map_err(|e| e.to_string())?;
    let mix = spec.mixture(1_000_000, SEED).map_err(|e| e.to_string())?;
    let shift = delta / sigma;
    let mut details = Vec::new();
    for alpha in [0.01, 0.05, 0.1] {
        let critical = chi2_1_quantile(1.0 - alpha);
        let mc = mixture_pvalue(&mix, critical).map_err(|e| e.to_string())?;
        let analytic = normal_sf(critical.sqrt() - shift) + normal_cdf(-critical.sqrt() - shift);
        if (mc - analytic).abs() > 0.01 {
            return Err(format!(
                "α={alpha}: Monte Carlo exceedance {mc:.4} vs noncentral χ² {analytic:.4}"
            ));
        }
        details.push(format!("α={alpha}: {mc:.4}≈{analytic:.4}"));
    }
    Ok(details.join(", "))
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

fn main() {
    type Criterion = (u32, &'static str, f64, fn() -> Result<String, String>);
    let criteria: [Criterion; 11] = [
        (1, "normal eigenvalue closed form", 10.0, c1_normal_eigenvalue),
        (2, "likelihood-ratio identity at β=γ=0", 1.0, c2_lrt_identity),
        (3, "classical t-test p-values", 1.0, c3_t_test_pvalues),
        (4, "one-sided signed-divergence p-values", 30.0, c4_one_sided_pvalues),
        (5, "tuning-parameter selection", 120.0, c5_tuning),
        (6, "chi-square mixture quantiles", 5.0, c6_mixture_quantiles),
        (7, "level under the pure normal model", 300.0, c7_level_pure_normal),
        (8, "level and power under contamination", 600.0, c8_contamination),
        (9, "Weibull oracle suite", 600.0, c9_weibull_suite),
        (10, "asymptotic covariance laws", 300.0, c10_covariance_laws),
        (11, "contiguous-alternative distribution", 60.0, c11_contiguous),
    ];

    let mut failed = 0u32;
    for (number, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(run);
        let elapsed = start.elapsed().as_secs_f64();
        let line = match outcome {
            Ok(Ok(detail)) if elapsed <= budget => {
                format!("ok - criterion {number}: {name} ({elapsed:.1}s) — {detail}")
            }
            Ok(Ok(detail)) => {
                failed += 1;
                format!(
                    "FAIL - criterion {number}: {name} — checks passed but runtime {elapsed:.1}s \
                     exceeded the {budget}s budget — {detail}"
                )
            }
            Ok(Err(why)) => {
                failed += 1;
                format!("FAIL - criterion {number}: {name} ({elapsed:.1}s) — {why}")
            }
            Err(payload) => {
                failed += 1;
                format!(
                    "FAIL - criterion {number}: {name} ({elapsed:.1}s) — panicked: {}",
                    panic_text(payload.as_ref())
                )
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        println!("{failed} of 11 criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
