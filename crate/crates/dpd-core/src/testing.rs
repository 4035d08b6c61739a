//! The divergence test statistic and its calibration.
//!
//! The DPDTS for `H₀: g(θ) = 0` is `T_γ = 2n·d_γ(f_{θ̂_β}, f_{θ̃_β})`; its
//! null law is the chi-square mixture `Σᵢ λᵢ Zᵢ²` whose weights come from
//! [`crate::asymptotics::null_spectrum`] evaluated at `θ̃_β`. Scalar
//! constraints (`k = 1`) are calibrated exactly against `χ²(1)` via `T/λ̂₁`;
//! larger `k` falls back to seeded Monte Carlo on the mixture. The module
//! also houses the signed one-sided variant for the normal location problem
//! and the classical one-sample t-test baseline.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::asymptotics::{normal_location_eigenvalue, null_spectrum};
use crate::divergence::{dpd, Dataset};
use crate::estimation::{fit_mdpde, fit_rmdpde};
use crate::models::{ConstraintSpec, NormalModel, ParametricModel};
use crate::numerics::fmath;
use crate::numerics::rng::RngStream;
use crate::numerics::special;
use crate::{Error, Result};

/// Draws generated per RNG stream; the partition (not the thread count)
/// fixes the sequence, so totals are reproducible however work is split.
const MC_CHUNK: u64 = 8192;

/// Sidedness of a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// Reject for large statistics (the DPDTS's native shape).
    TwoSided,
    /// `H₁: θ > θ₀` for signed statistics.
    Greater,
    /// `H₁: θ < θ₀` for signed statistics.
    Less,
}

/// Where the mixture weights are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenAt {
    /// At `θ̃_β` — the standard recipe and the default.
    Restricted,
    /// At `θ̂_β`, for sensitivity analysis.
    Unrestricted,
}

/// A (possibly noncentral, shifted) chi-square mixture
/// `Σᵢ λᵢ (Zᵢ + wᵢ)² + η` with independent standard normal `Zᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareMixture {
    weights: Vec<f64>,
    noncentral_shifts: Option<Vec<f64>>,
    offset: f64,
    mc_draws: u64,
    seed: u64,
}

impl ChiSquareMixture {
    /// Central mixture `Σ λᵢ Zᵢ²` (the Theorem 3 null law).
    ///
    /// # Errors
    /// [`Error::Domain`] when `weights` is empty, contains a non-positive
    /// entry, or `mc_draws` is zero.
    pub fn new(weights: Vec<f64>, mc_draws: u64, seed: u64) -> Result<Self> {
        Self::noncentral(weights, None, 0.0, mc_draws, seed)
    }

    /// Full form `Σ λᵢ(Zᵢ + wᵢ)² + η` (the Theorem 9 contiguous law).
    ///
    /// # Errors
    /// As [`ChiSquareMixture::new`]; additionally when the shift vector
    /// length differs from the weight count or entries are non-finite.
    pub fn noncentral(
        weights: Vec<f64>,
        noncentral_shifts: Option<Vec<f64>>,
        offset: f64,
        mc_draws: u64,
        seed: u64,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("mixture needs at least one weight"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::domain(format!("mixture weights must be positive: {weights:?}")));
        }
        if let Some(w) = &noncentral_shifts {
            if w.len() != weights.len() {
                return Err(Error::domain(format!(
                    "{} shifts for {} weights",
                    w.len(),
                    weights.len()
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("noncentral shifts must be finite"));
            }
        }
        if !offset.is_finite() {
            return Err(Error::domain("offset must be finite"));
        }
        if mc_draws == 0 {
            return Err(Error::domain("mc_draws must be positive"));
        }
        Ok(ChiSquareMixture { weights, noncentral_shifts, offset, mc_draws, seed })
    }

    /// The mixture weights λᵢ.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of Monte Carlo draws used by quantile/p-value queries.
    pub fn mc_draws(&self) -> u64 {
        self.mc_draws
    }

    /// Mean of the mixture: `Σ λᵢ(1 + wᵢ²) + η`.
    pub fn mean(&self) -> f64 {
        let mut m = self.offset;
        for (i, l) in self.weights.iter().enumerate() {
            let w = self.noncentral_shifts.as_ref().map_or(0.0, |s| s[i]);
            m += l * (1.0 + w * w);
        }
        m
    }

    /// True when the exact `χ²(1)` CDF route applies: one component,
    /// central, no offset.
    fn is_exact_chi2_1(&self) -> bool {
        self.weights.len() == 1
            && self.offset == 0.0
            && self.noncentral_shifts.as_ref().is_none_or(|w| w[0] == 0.0)
    }

    /// Simulate all draws, chunk-partitioned across seeded streams.
    fn simulate(&self) -> Vec<f64> {
        let m = self.mc_draws as usize;
        let mut draws = Vec::with_capacity(m);
        let chunks = self.mc_draws.div_ceil(MC_CHUNK);
        for chunk in 0..chunks {
            let mut rng = RngStream::new(self.seed, chunk);
            let len = MC_CHUNK.min(self.mc_draws - chunk * MC_CHUNK);
            for _ in 0..len {
                let mut v = self.offset;
                for (i, l) in self.weights.iter().enumerate() {
                    let w = self.noncentral_shifts.as_ref().map_or(0.0, |s| s[i]);
                    let z = rng.next_gaussian() + w;
                    v += l * z * z;
                }
                draws.push(v);
            }
        }
        draws
    }
}

/// Upper (1−α) quantile of the mixture: `c` with `P(mix ≥ c) = α`.
///
/// Exact through the `χ²(1)` CDF when the mixture is a single central
/// component; otherwise the empirical quantile of the seeded Monte Carlo
/// draws.
///
/// # Errors
/// [`Error::Domain`] for `α ∉ (0,1)`; [`Error::McUnderResolved`] when the
/// Monte Carlo route would have fewer than 10 draws past the cutoff
/// (`α < 10/mc_draws`).
pub fn mixture_quantile(mix: &ChiSquareMixture, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    if mix.is_exact_chi2_1() {
        return Ok(mix.weights[0] * special::chi2_1_quantile(1.0 - alpha));
    }
    if alpha < 10.0 / mix.mc_draws as f64 {
        return Err(Error::McUnderResolved { alpha, mc_draws: mix.mc_draws });
    }
    let mut draws = mix.simulate();
    let m = draws.len();
    // ⌈(1−α)m⌉-th order statistic (1-based), so the exceedance count is
    // ⌊αm⌋ and mixture_pvalue at this point returns ≈ α.
    let rank = fmath::ceil((1.0 - alpha) * m as f64) as usize;
    let idx = rank.clamp(1, m) - 1;
    let (_, val, _) = draws.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*val)
}

/// Monte Carlo p-value `P(mix ≥ t)`, floored at `1/(mc_draws+1)` because a
/// finite simulation cannot certify an exact zero. Exact when the single
/// central-component route applies.
///
/// # Errors
/// [`Error::Domain`] for non-finite `t`.
pub fn mixture_pvalue(mix: &ChiSquareMixture, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::domain(format!("statistic must be finite, got {t}")));
    }
    let floor = 1.0 / (mix.mc_draws as f64 + 1.0);
    if mix.is_exact_chi2_1() {
        let p = special::chi2_1_sf(t / mix.weights[0]);
        return Ok(p.max(floor));
    }
    let draws = mix.simulate();
    let count = draws.iter().filter(|v| **v >= t).count();
    Ok((count as f64 / draws.len() as f64).max(floor))
}

/// Everything a test run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// The test statistic (`T_γ`, the signed `Z̃`, or the t statistic).
    pub statistic: f64,
    /// Mixture weights used for calibration (empty for the t-test).
    pub eigenvalues: Vec<f64>,
    /// The p-value, in `[0, 1]`.
    pub p_value: f64,
    /// Critical value `c_α`: reject when the statistic falls past it on the
    /// alternative's side.
    pub critical_value: f64,
    /// Nominal level the critical value was computed for.
    pub alpha: f64,
    /// Sidedness of the test.
    pub alternative: Alternative,
    /// Unrestricted estimate `θ̂_β`.
    pub theta_hat: Vec<f64>,
    /// Restricted estimate `θ̃_β`.
    pub theta_tilde: Vec<f64>,
    /// Estimation tuning parameter.
    pub beta: f64,
    /// Divergence tuning parameter of the statistic.
    pub gamma: f64,
    /// Short label: `"dpd"`, `"signed-dpd"`, or `"t"`.
    pub method: String,
}

impl TestResult {
    /// Reject `H₀` at the stored level: `p_value ≤ alpha`.
    pub fn reject(&self) -> bool {
        self.p_value <= self.alpha
    }
}

/// The one-sided pair of §6.1.3: the signed statistic referred to the
/// standard normal and, as a small-sample companion, to Student's t with
/// `n−1` degrees of freedom, plus the boundary-mixture alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedTestResult {
    /// Primary result: `Z̃` with the normal reference (`p = 1−Φ(Z̃)`).
    pub z: TestResult,
    /// Companion p-value: the same `Z̃` referred to `t_{n−1}`.
    pub t_p_value: f64,
    /// Documented alternative: the `½χ²₀ + ½χ²₁` boundary-mixture p-value
    /// (equal to the normal route on the rejection side).
    pub half_chi2_p_value: f64,
}

/// The DPD test of `H₀: g(θ) = 0` with mixture weights at `θ̃_β`.
///
/// Fits both estimators, forms `T_γ = 2n·d_γ(f_{θ̂_β}, f_{θ̃_β})`, and
/// calibrates it against the Theorem 3 chi-square mixture — exactly via
/// `χ²(1)` when `k = 1`, by seeded Monte Carlo otherwise.
///
/// # Errors
/// Estimation and spectrum errors propagate; [`Error::Domain`] for
/// `α ∉ (0,1)`; [`Error::McUnderResolved`] when the Monte Carlo route
/// cannot resolve the requested `α` (the exact `k = 1` route is immune).
#[allow(clippy::too_many_arguments)]
pub fn dpd_test(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    gamma: f64,
    constraint: &ConstraintSpec,
    alpha: f64,
    mc_draws: u64,
    seed: u64,
) -> Result<TestResult> {
    dpd_test_at(model, data, beta, gamma, constraint, alpha, mc_draws, seed, EigenAt::Restricted)
}

/// [`dpd_test`] with an explicit choice of eigenvalue evaluation point.
#[allow(clippy::too_many_arguments)]
pub fn dpd_test_at(
    model: &dyn ParametricModel,
    data: &Dataset,
    beta: f64,
    gamma: f64,
    constraint: &ConstraintSpec,
    alpha: f64,
    mc_draws: u64,
    seed: u64,
    eig_at: EigenAt,
) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    let hat = fit_mdpde(model, data, beta, None)?;
    let tilde = fit_rmdpde(model, data, beta, constraint, None)?;
    let n = data.n() as f64;
    let statistic = 2.0 * n * dpd(model, &hat.theta_hat, &tilde.theta_hat, gamma)?;
    let eig_point = match eig_at {
        EigenAt::Restricted => &tilde.theta_hat,
        EigenAt::Unrestricted => &hat.theta_hat,
    };
    let spectrum = null_spectrum(model, eig_point, beta, gamma, constraint)?;
    let mix = ChiSquareMixture::new(spectrum.eigenvalues.clone(), mc_draws, seed)?;
    let p_value = mixture_pvalue(&mix, statistic)?;
    let critical_value = mixture_quantile(&mix, alpha)?;
    Ok(TestResult {
        statistic,
        eigenvalues: spectrum.eigenvalues,
        p_value,
        critical_value,
        alpha,
        alternative: Alternative::TwoSided,
        theta_hat: hat.theta_hat,
        theta_tilde: tilde.theta_hat,
        beta,
        gamma,
        method: String::from("dpd"),
    })
}

/// Signed one-sided DPD test for the normal location (§6.1.3):
/// `Z̃ = sign(μ̂_β − μ₀)·√(T_γ/λ̂₁)` with `λ̂₁` evaluated at `σ̃_β`.
///
/// `direction` must be [`Alternative::Greater`] (`H₁: μ > μ₀`) or
/// [`Alternative::Less`]. The result carries the normal-reference p-value;
/// the `t_{n−1}` companion and the boundary-mixture alternative ride along
/// in [`SignedTestResult`].
///
/// # Errors
/// As [`dpd_test`]; [`Error::Domain`] for a two-sided `direction`.
pub fn signed_one_sided_test(
    model: &NormalModel,
    data: &Dataset,
    beta: f64,
    gamma: f64,
    mu0: f64,
    direction: Alternative,
    alpha: f64,
) -> Result<SignedTestResult> {
    if direction == Alternative::TwoSided {
        return Err(Error::domain(
            "the signed statistic is one-sided; use dpd_test for two-sided nulls",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    let constraint = ConstraintSpec::pin(0, mu0, format!("mu = {mu0}"));
    let hat = fit_mdpde(model, data, beta, None)?;
    let tilde = fit_rmdpde(model, data, beta, &constraint, None)?;
    let n = data.n() as f64;
    let t_stat = 2.0 * n * dpd(model, &hat.theta_hat, &tilde.theta_hat, gamma)?;
    let lambda = normal_location_eigenvalue(beta, gamma, tilde.theta_hat[1]);
    let scaled = (t_stat / lambda).max(0.0);
    let sign = if hat.theta_hat[0] > mu0 {
        1.0
    } else if hat.theta_hat[0] < mu0 {
        -1.0
    } else {
        0.0
    };
    let z = sign * fmath::sqrt(scaled);
    let df = n - 1.0;
    let (p_z, p_t, critical_value) = match direction {
        Alternative::Greater => (
            special::normal_sf(z),
            special::t_sf(z, df),
            special::normal_quantile(1.0 - alpha),
        ),
        Alternative::Less => {
            (special::normal_cdf(z), special::t_cdf(z, df), special::normal_quantile(alpha))
        }
        Alternative::TwoSided => unreachable!("rejected above"),
    };
    let on_rejection_side = match direction {
        Alternative::Greater => z > 0.0,
        _ => z < 0.0,
    };
    let half_chi2_p_value =
        if on_rejection_side { 0.5 * special::chi2_1_sf(scaled) } else { 1.0 };
    Ok(SignedTestResult {
        z: TestResult {
            statistic: z,
            eigenvalues: alloc::vec![lambda],
            p_value: p_z,
            critical_value,
            alpha,
            alternative: direction,
            theta_hat: hat.theta_hat,
            theta_tilde: tilde.theta_hat,
            beta,
            gamma,
            method: String::from("signed-dpd"),
        },
        t_p_value: p_t,
        half_chi2_p_value,
    })
}

/// Classical one-sample Student t-test of `μ = μ₀`, the comparison baseline.
///
/// # Errors
/// [`Error::DegenerateData`] for `n < 2` or zero sample variance;
/// [`Error::Domain`] for `α ∉ (0,1)`.
pub fn t_test(data: &Dataset, mu0: f64, alternative: Alternative, alpha: f64) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {alpha}")));
    }
    let xs = data.values();
    let n = xs.len();
    if n < 2 {
        return Err(Error::degenerate(format!(
            "t-test needs n >= 2, dataset '{}' has {n}",
            data.label()
        )));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    if ss <= 0.0 {
        return Err(Error::degenerate(format!(
            "t-test needs nonzero sample variance, dataset '{}' is constant",
            data.label()
        )));
    }
    let s = fmath::sqrt(ss / (nf - 1.0));
    let statistic = (mean - mu0) / (s / fmath::sqrt(nf));
    let df = nf - 1.0;
    let (p_value, critical_value) = match alternative {
        Alternative::TwoSided => (
            2.0 * special::t_sf(fmath::abs(statistic), df),
            special::t_quantile(1.0 - 0.5 * alpha, df),
        ),
        Alternative::Greater => {
            (special::t_sf(statistic, df), special::t_quantile(1.0 - alpha, df))
        }
        Alternative::Less => (special::t_cdf(statistic, df), special::t_quantile(alpha, df)),
    };
    Ok(TestResult {
        statistic,
        eigenvalues: Vec::new(),
        p_value: p_value.min(1.0),
        critical_value,
        alpha,
        alternative,
        theta_hat: alloc::vec![mean, s],
        theta_tilde: alloc::vec![mu0, s],
        beta: 0.0,
        gamma: 0.0,
        method: String::from("t"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn telephone() -> Dataset {
        Dataset::new(
            alloc::vec![
                -988.0, -135.0, -78.0, 3.0, 59.0, 83.0, 93.0, 110.0, 189.0, 197.0, 204.0, 229.0,
                289.0, 310.0
            ],
            "telephone",
        )
        .unwrap()
    }

    fn darwin() -> Dataset {
        Dataset::new(
            alloc::vec![
                -67.0, -48.0, 6.0, 8.0, 14.0, 16.0, 23.0, 24.0, 28.0, 29.0, 41.0, 49.0, 56.0,
                60.0, 75.0
            ],
            "darwin",
        )
        .unwrap()
    }

    #[test]
    fn lrt_identity_at_beta_gamma_zero() {
        for data in [telephone(), darwin()] {
            let c = ConstraintSpec::pin(0, 0.0, "mu = 0");
            let res = dpd_test(&NormalModel, &data, 0.0, 0.0, &c, 0.05, 10_000, 7).unwrap();
            let n = data.n() as f64;
            let sigma_hat = res.theta_hat[1];
            let sigma_tilde = res.theta_tilde[1];
            let lrt = n * fmath::ln((sigma_tilde * sigma_tilde) / (sigma_hat * sigma_hat));
            assert_abs_diff_eq!(res.statistic, lrt, epsilon = 1e-8 * lrt.max(1.0));
            // σ̂²/σ̃² + (X̄−μ₀)²/σ̃² = 1 (§4 "routine calculation").
            let mean = res.theta_hat[0];
            let ratio = (sigma_hat * sigma_hat) / (sigma_tilde * sigma_tilde)
                + mean * mean / (sigma_tilde * sigma_tilde);
            assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-12);
            // β=γ=0 with k=1 has eigenvalue exactly 1 → exact χ²(1) route.
            assert_abs_diff_eq!(res.eigenvalues[0], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn data_on_the_constraint_gives_zero_statistic() {
        let data = Dataset::new(alloc::vec![-1.0, 0.0, 1.0], "sym").unwrap();
        let c = ConstraintSpec::pin(0, 0.0, "mu = 0");
        let res = dpd_test(&NormalModel, &data, 0.0, 0.0, &c, 0.05, 10_000, 7).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert!(!res.reject());
    }

    #[test]
    fn telephone_rejects_at_beta_015_but_not_at_zero() {
        let c = ConstraintSpec::pin(0, 0.0, "mu = 0");
        let robust = dpd_test(&NormalModel, &telephone(), 0.15, 0.15, &c, 0.05, 10_000, 7).unwrap();
        assert!(robust.p_value < 0.05, "robust p = {}", robust.p_value);
        assert!(robust.reject());
        assert!(robust.statistic >= robust.critical_value);
        // The β=0 test is wrecked by the −988 outlier and cannot reject.
        let mle = dpd_test(&NormalModel, &telephone(), 0.0, 0.0, &c, 0.05, 10_000, 7).unwrap();
        assert!(mle.p_value > 0.5, "mle p = {}", mle.p_value);
        assert!((0.5..0.7).contains(&mle.p_value));
    }

    #[test]
    fn mixture_quantile_oracles() {
        // χ²(1): exact route.
        let one = ChiSquareMixture::new(alloc::vec![1.0], 1_000_000, 42).unwrap();
        assert_abs_diff_eq!(mixture_quantile(&one, 0.05).unwrap(), 3.8415, epsilon = 0.02);
        // χ²(2) = sum of two unit-weight components: Monte Carlo route.
        let two = ChiSquareMixture::new(alloc::vec![1.0, 1.0], 1_000_000, 42).unwrap();
        assert_abs_diff_eq!(mixture_quantile(&two, 0.05).unwrap(), 5.9915, epsilon = 0.03);
        // Offset forces the MC route even for k=1: quantile shifts by η.
        let shifted =
            ChiSquareMixture::noncentral(alloc::vec![1.0], None, 5.0, 1_000_000, 42).unwrap();
        assert_abs_diff_eq!(mixture_quantile(&shifted, 0.05).unwrap() - 5.0, 3.8415, epsilon = 0.05);
    }

    #[test]
    fn mixture_scaling_is_exact_for_fixed_seed() {
        // Linearity of the simulated sum; with a power-of-two factor the
        // equality is bit-exact because rounding commutes with ×2^k.
        let weights = alloc::vec![0.7, 0.3];
        let c = 4.0;
        let scaled_weights: Vec<f64> = weights.iter().map(|w| c * w).collect();
        let base = ChiSquareMixture::new(weights, 100_000, 9).unwrap();
        let scaled = ChiSquareMixture::new(scaled_weights, 100_000, 9).unwrap();
        let q1 = mixture_quantile(&base, 0.05).unwrap();
        let qc = mixture_quantile(&scaled, 0.05).unwrap();
        assert_eq!(qc, c * q1);
        // A non-dyadic factor still scales to a dozen digits.
        let almost = ChiSquareMixture::new(alloc::vec![3.0 * 0.7, 3.0 * 0.3], 100_000, 9).unwrap();
        let q3 = mixture_quantile(&almost, 0.05).unwrap();
        assert_relative_eq!(q3, 3.0 * q1, max_relative = 1e-12);
    }

    #[test]
    fn pvalue_quantile_round_trip() {
        let mix = ChiSquareMixture::new(alloc::vec![2.0, 0.5], 200_000, 5).unwrap();
        for alpha in [0.01, 0.05, 0.2] {
            let q = mixture_quantile(&mix, alpha).unwrap();
            let p = mixture_pvalue(&mix, q).unwrap();
            assert_abs_diff_eq!(p, alpha, epsilon = 2.0 / fmath::sqrt(200_000.0));
        }
    }

    #[test]
    fn pvalue_is_monotone_and_floored() {
        let mix = ChiSquareMixture::new(alloc::vec![1.0, 0.5], 50_000, 3).unwrap();
        let mut last = f64::INFINITY;
        for t in [0.0, 1.0, 3.0, 8.0, 20.0] {
            let p = mixture_pvalue(&mix, t).unwrap();
            assert!(p <= last, "p not monotone at t = {t}");
            last = p;
        }
        let tiny = mixture_pvalue(&mix, 1e9).unwrap();
        assert_eq!(tiny, 1.0 / 50_001.0);
    }

    #[test]
    fn under_resolved_alpha_is_an_error() {
        let mix = ChiSquareMixture::new(alloc::vec![1.0, 1.0], 100_000, 1).unwrap();
        assert!(matches!(
            mixture_quantile(&mix, 1e-6),
            Err(Error::McUnderResolved { .. })
        ));
        // The exact route is immune to MC resolution limits.
        let exact = ChiSquareMixture::new(alloc::vec![1.0], 100_000, 1).unwrap();
        assert!(mixture_quantile(&exact, 1e-6).unwrap() > 20.0);
    }

    #[test]
    fn determinism_bit_for_bit() {
        let c = ConstraintSpec::pin(0, 0.0, "mu = 0");
        let a = dpd_test(&NormalModel, &darwin(), 0.2, 0.2, &c, 0.05, 50_000, 11).unwrap();
        let b = dpd_test(&NormalModel, &darwin(), 0.2, 0.2, &c, 0.05, 50_000, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn t_test_matches_frozen_oracles() {
        // Frozen against an independent implementation of the one-sample
        // t-test (17 significant digits).
        let full = t_test(&telephone(), 0.0, Alternative::TwoSided, 0.05).unwrap();
        assert_relative_eq!(full.statistic, 0.46737795961030715, max_relative = 1e-12);
        assert_relative_eq!(full.p_value, 0.64796692521240562, max_relative = 1e-10);
        assert!(!full.reject());

        let cleaned = Dataset::new(telephone().values()[1..].to_vec(), "cleaned").unwrap();
        let res = t_test(&cleaned, 0.0, Alternative::TwoSided, 0.05).unwrap();
        assert_relative_eq!(res.statistic, 3.1947835002634792, max_relative = 1e-12);
        assert_relative_eq!(res.p_value, 0.0077067901394376947, max_relative = 1e-10);

        let dar = t_test(&darwin(), 0.0, Alternative::TwoSided, 0.05).unwrap();
        assert_relative_eq!(dar.statistic, 2.1479874613311201, max_relative = 1e-12);
        assert_relative_eq!(dar.p_value, 0.049702944021800956, max_relative = 1e-10);
        assert!(dar.reject());

        let dar_clean = Dataset::new(darwin().values()[2..].to_vec(), "darwin-cleaned").unwrap();
        let res = t_test(&dar_clean, 0.0, Alternative::TwoSided, 0.05).unwrap();
        assert_relative_eq!(res.p_value, 0.00013118635807704925, max_relative = 1e-10);
    }

    #[test]
    fn t_test_one_sided_halves_the_symmetric_pvalue() {
        let two = t_test(&darwin(), 0.0, Alternative::TwoSided, 0.05).unwrap();
        let greater = t_test(&darwin(), 0.0, Alternative::Greater, 0.05).unwrap();
        let less = t_test(&darwin(), 0.0, Alternative::Less, 0.05).unwrap();
        assert_relative_eq!(greater.p_value, 0.5 * two.p_value, max_relative = 1e-12);
        assert_relative_eq!(greater.p_value + less.p_value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn t_test_rejects_degenerate_data() {
        let flat = Dataset::new(alloc::vec![5.0; 8], "flat").unwrap();
        assert!(matches!(
            t_test(&flat, 0.0, Alternative::TwoSided, 0.05),
            Err(Error::DegenerateData { .. })
        ));
    }

    #[test]
    fn signed_test_reproduces_table_values() {
        // §6.1.3 Tables 3–4, "Full" columns, within the paper's ±0.0015.
        let tel = signed_one_sided_test(
            &NormalModel,
            &telephone(),
            0.15,
            0.15,
            0.0,
            Alternative::Greater,
            0.05,
        )
        .unwrap();
        assert_abs_diff_eq!(tel.z.p_value, 0.0006, epsilon = 0.0015);
        assert_abs_diff_eq!(tel.t_p_value, 0.0032, epsilon = 0.0015);
        assert!(tel.z.statistic > 0.0);

        let dar = signed_one_sided_test(
            &NormalModel,
            &darwin(),
            0.15,
            0.15,
            0.0,
            Alternative::Greater,
            0.05,
        )
        .unwrap();
        assert_abs_diff_eq!(dar.z.p_value, 0.0081, epsilon = 0.0015);
        assert_abs_diff_eq!(dar.t_p_value, 0.0153, epsilon = 0.0015);
    }

    #[test]
    fn signed_test_agrees_with_half_chi2_on_rejection_side() {
        let res = signed_one_sided_test(
            &NormalModel,
            &darwin(),
            0.15,
            0.15,
            0.0,
            Alternative::Greater,
            0.05,
        )
        .unwrap();
        // For Z̃ > 0 the ½χ²₀+½χ²₁ route equals the Φ route identically.
        assert_relative_eq!(res.half_chi2_p_value, res.z.p_value, max_relative = 1e-12);
        // Wrong-direction alternative: Z̃ > 0 makes "less" hopeless.
        let less = signed_one_sided_test(
            &NormalModel,
            &darwin(),
            0.15,
            0.15,
            0.0,
            Alternative::Less,
            0.05,
        )
        .unwrap();
        assert!(less.z.p_value > 0.95);
        assert_eq!(less.half_chi2_p_value, 1.0);
        // Two-sided direction is rejected.
        assert!(signed_one_sided_test(
            &NormalModel,
            &darwin(),
            0.15,
            0.15,
            0.0,
            Alternative::TwoSided,
            0.05
        )
        .is_err());
    }

    #[test]
    fn dpd_test_weibull_scalar_pin_runs_exact_route() {
        let mut rng = RngStream::new(77, 0);
        let model = crate::models::WeibullModel;
        let xs: Vec<f64> = (0..120).map(|_| model.sample(&[1.5, 1.5], &mut rng)).collect();
        let data = Dataset::new(xs, "w").unwrap();
        let c = ConstraintSpec::pin(0, 1.5, "sigma = 1.5");
        let res = dpd_test(&model, &data, 0.25, 0.25, &c, 0.05, 100_000, 3).unwrap();
        assert_eq!(res.eigenvalues.len(), 1);
        assert!(res.statistic >= 0.0);
        assert!((0.0..=1.0).contains(&res.p_value));
        let consistent = (res.p_value <= 0.05) == (res.statistic >= res.critical_value);
        assert!(consistent, "p/critical inconsistency: {res:?}");
    }
}
