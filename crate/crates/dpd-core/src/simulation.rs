//! Monte Carlo harness for level and power experiments under
//! contamination mixtures.
//!
//! A [`MixtureScenario`] describes the data-generating mixture, an
//! [`ExperimentPlan`] fixes the hypothesis, the β sweep (with `γ = β`),
//! sample sizes, and replication budget, and [`run_experiment`] tabulates
//! rejection rates. Replication `i` of a given sample size always draws
//! from its own deterministic stream, so tables are bit-for-bit
//! reproducible regardless of how the replications are scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::divergence::Dataset;
use crate::models::{ConstraintSpec, ParametricModel};
use crate::numerics::rng::RngStream;
use crate::testing::{dpd_test, t_test, Alternative};
use crate::{Error, Result};

/// Monte Carlo draws handed to [`dpd_test`] per replication. Scalar
/// constraints take the exact `χ²(1)/λ̂` route and never consume them.
const SIM_MC_DRAWS: u64 = 10_000;

/// A finite mixture of parametric components, the data-generating truth.
pub struct MixtureScenario<'a> {
    components: Vec<(&'a dyn ParametricModel, Vec<f64>)>,
    weights: Vec<f64>,
    label: String,
}

impl<'a> MixtureScenario<'a> {
    /// Build a mixture; weights must be in `[0,1]` and sum to `1 ± 1e−12`.
    ///
    /// # Errors
    /// [`Error::Domain`] on empty/mismatched components, invalid weights,
    /// or a `θ` outside its component's parameter domain.
    pub fn new(
        components: Vec<(&'a dyn ParametricModel, Vec<f64>)>,
        weights: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::domain(format!(
                "{} components against {} weights",
                components.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::domain("mixture weights must lie in [0, 1]"));
        }
        let total: f64 = weights.iter().sum();
        if !((total - 1.0).abs() <= 1e-12) {
            return Err(Error::domain(format!("mixture weights sum to {total}, not 1")));
        }
        for (model, theta) in &components {
            if !model.in_domain(theta) {
                return Err(Error::domain(format!(
                    "component parameter {theta:?} outside the {} domain",
                    model.name()
                )));
            }
        }
        Ok(MixtureScenario { components, weights, label: label.into() })
    }

    /// A single-component "mixture".
    pub fn pure(
        model: &'a dyn ParametricModel,
        theta: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        MixtureScenario::new(alloc::vec![(model, theta)], alloc::vec![1.0], label)
    }

    /// The scenario label.
    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Draw `n` i.i.d. observations from the mixture: a component is picked by
/// weight, then one value is drawn from it.
pub fn sample_scenario(scenario: &MixtureScenario, n: usize, stream: &mut RngStream) -> Dataset {
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let u = stream.next_uniform();
        let mut cumulative = 0.0;
        let mut pick = scenario.components.len() - 1;
        for (idx, w) in scenario.weights.iter().enumerate() {
            cumulative += w;
            if u < cumulative {
                pick = idx;
                break;
            }
        }
        let (model, theta) = &scenario.components[pick];
        values.push(model.sample(theta, stream));
    }
    Dataset::new(values, scenario.label.clone()).expect("mixture draws are finite")
}

/// One level/power experiment: the scenario, the fitted model and null
/// constraint, the β sweep (`γ = β` throughout), sample sizes,
/// replications, level, and seed.
pub struct ExperimentPlan<'a> {
    /// Data-generating mixture.
    pub scenario: MixtureScenario<'a>,
    /// The model family the tests fit (typically the main component's).
    pub model: &'a dyn ParametricModel,
    /// The null constraint; its pin carries the tested value.
    pub hypothesis: ConstraintSpec,
    /// Tuning parameters to sweep, each tested with `γ = β`.
    pub betas: Vec<f64>,
    /// Sample sizes to sweep.
    pub sample_sizes: Vec<usize>,
    /// Replications per `(n, β)` cell.
    pub replications: u32,
    /// Nominal level.
    pub alpha: f64,
    /// Master seed; replication `i` of the `j`-th sample size uses stream
    /// `j·replications + i`.
    pub master_seed: u64,
    /// Also run the two-sided Student t baseline against the pinned
    /// location (requires a coordinate-0 pin).
    pub baseline_t: bool,
}

/// One row of the rejection table. The t baseline carries no β/γ.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionRow {
    /// Sample size of the cell.
    pub n: usize,
    /// β of the DPD test (`None` on baseline rows).
    pub beta: Option<f64>,
    /// γ of the DPD test (equal to β here; `None` on baseline rows).
    pub gamma: Option<f64>,
    /// `"dpd"` or `"t"`.
    pub test: String,
    /// Fraction of replications that rejected (failures count as
    /// non-rejections).
    pub rate: f64,
    /// `√(rate·(1−rate)/replications)`.
    pub mc_std_error: f64,
    /// Replications whose fit or test failed in this cell.
    pub failures: u32,
}

/// Rejection rates for every `(n, β)` cell plus baselines, in
/// deterministic sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionTable {
    /// Rows ordered by sample size, then β (baseline row last per size).
    pub rows: Vec<RejectionRow>,
    /// Replications behind every rate.
    pub replications: u32,
    /// Nominal level the rates are compared against.
    pub alpha: f64,
}

/// Outcome of a single replication: one flag per planned β, plus the
/// baseline. `None` marks a failed fit/test (tabulated as non-rejection).
#[derive(Debug, Clone)]
pub struct ReplicationOutcome {
    /// Per-β rejection flags, aligned with `plan.betas`.
    pub dpd_rejects: Vec<Option<bool>>,
    /// Baseline t rejection, when enabled.
    pub t_reject: Option<Option<bool>>,
}

fn validate(plan: &ExperimentPlan) -> Result<f64> {
    if plan.replications == 0 {
        return Err(Error::domain("replications must be at least 1"));
    }
    if plan.sample_sizes.iter().any(|&n| n < 2) || plan.sample_sizes.is_empty() {
        return Err(Error::domain("sample sizes must all be at least 2"));
    }
    if plan.betas.is_empty() || plan.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(Error::domain("betas must be a nonempty subset of [0, 1]"));
    }
    if !(plan.alpha > 0.0 && plan.alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0,1), got {}", plan.alpha)));
    }
    if plan.baseline_t {
        let mu0 = plan
            .hypothesis
            .pinned()
            .and_then(|pins| pins.iter().find(|&&(i, _)| i == 0).map(|&(_, v)| v));
        match mu0 {
            Some(v) => Ok(v),
            None => Err(Error::domain(
                "the t baseline needs a location pin (coordinate 0) in the hypothesis",
            )),
        }
    } else {
        Ok(f64::NAN)
    }
}

/// Run replication `rep` of the `size_index`-th sample size: draw the
/// sample from its dedicated stream and apply every planned test to it.
///
/// Exposed so a driver can shard replications across workers; summing the
/// outcomes in any order reproduces [`run_experiment`] exactly.
///
/// # Errors
/// [`Error::Domain`] on an invalid plan or `size_index` out of range.
pub fn run_replication(
    plan: &ExperimentPlan,
    size_index: usize,
    rep: u32,
) -> Result<ReplicationOutcome> {
    let mu0 = validate(plan)?;
    let &n = plan
        .sample_sizes
        .get(size_index)
        .ok_or_else(|| Error::domain("size_index out of range"))?;
    let stream_index = size_index as u64 * u64::from(plan.replications) + u64::from(rep);
    let mut stream = RngStream::new(plan.master_seed, stream_index);
    let data = sample_scenario(&plan.scenario, n, &mut stream);

    let mut dpd_rejects = Vec::with_capacity(plan.betas.len());
    for &beta in &plan.betas {
        let verdict = dpd_test(
            plan.model,
            &data,
            beta,
            beta,
            &plan.hypothesis,
            plan.alpha,
            SIM_MC_DRAWS,
            plan.master_seed ^ stream_index,
        )
        .ok()
        .map(|t| t.reject());
        dpd_rejects.push(verdict);
    }
    let t_reject = plan.baseline_t.then(|| {
        t_test(&data, mu0, Alternative::TwoSided, plan.alpha).ok().map(|t| t.reject())
    });
    Ok(ReplicationOutcome { dpd_rejects, t_reject })
}

/// Sweep the full plan and tabulate rejection rates.
///
/// Failed fits count as non-rejections and are reported in the row's
/// `failures` column; the rate denominator is always the replication
/// count.
///
/// # Errors
/// [`Error::Domain`] on an invalid plan.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<RejectionTable> {
    validate(plan)?;
    let reps = plan.replications;
    let mut rows = Vec::new();
    for (size_index, &n) in plan.sample_sizes.iter().enumerate() {
        let mut dpd_hits = alloc::vec![0u32; plan.betas.len()];
        let mut dpd_fail = alloc::vec![0u32; plan.betas.len()];
        let mut t_hits = 0u32;
        let mut t_fail = 0u32;
        for rep in 0..reps {
            let outcome = run_replication(plan, size_index, rep)?;
            for (slot, verdict) in outcome.dpd_rejects.iter().enumerate() {
                match verdict {
                    Some(true) => dpd_hits[slot] += 1,
                    Some(false) => {}
                    None => dpd_fail[slot] += 1,
                }
            }
            match outcome.t_reject {
                Some(Some(true)) => t_hits += 1,
                Some(None) => t_fail += 1,
                _ => {}
            }
        }
        for (slot, &beta) in plan.betas.iter().enumerate() {
            rows.push(row(n, Some(beta), "dpd", dpd_hits[slot], dpd_fail[slot], reps));
        }
        if plan.baseline_t {
            rows.push(row(n, None, "t", t_hits, t_fail, reps));
        }
    }
    Ok(RejectionTable { rows, replications: reps, alpha: plan.alpha })
}

fn row(n: usize, beta: Option<f64>, test: &str, hits: u32, failures: u32, reps: u32) -> RejectionRow {
    let rate = f64::from(hits) / f64::from(reps);
    RejectionRow {
        n,
        beta,
        gamma: beta,
        test: String::from(test),
        rate,
        mc_std_error: crate::numerics::fmath::sqrt(rate * (1.0 - rate) / f64::from(reps)),
        failures,
    }
}
