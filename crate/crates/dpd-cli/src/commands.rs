//! Subcommand implementations.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use dpd_core::estimation::{fit_mdpde, fit_rmdpde, EstimationResult};
use dpd_core::models::ConstraintSpec;
use dpd_core::power::{power_report, sample_size_report};
use dpd_core::simulation::{
    run_replication, ExperimentPlan, RejectionRow, RejectionTable,
};
use dpd_core::testing::{dpd_test, signed_one_sided_test};
use dpd_core::tuning::{select_beta, TuningConfig};

use crate::cli::{
    Command, DatasetsArgs, EstimateArgs, Format, ModelKind, PowerArgs, SamplesizeArgs,
    SimulateArgs, TestArgs, TestOnesidedArgs, TuneArgs,
};
use crate::datasets::{self, DataError, NamedDataset};
use crate::report::{core_error_kind, inputs, Report, VERSION};
use crate::scenario;

/// What a successful run hands back to the dispatcher.
#[derive(Debug)]
pub struct Output {
    /// The serialized report.
    pub content: String,
    /// Destination (`None` = stdout).
    pub path: Option<PathBuf>,
}

/// Failure classification driving the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Inconsistent or malformed flags: exit 2, diagnostic on stderr.
    Usage(String),
    /// Data or numerical failure: exit 1, structured JSON report.
    Runtime {
        /// Stable machine-readable kind.
        kind: String,
        /// Human-readable message.
        message: String,
    },
}

impl From<dpd_core::Error> for CliError {
    fn from(e: dpd_core::Error) -> Self {
        CliError::Runtime { kind: core_error_kind(&e).to_string(), message: e.to_string() }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::UnknownDataset(_) => CliError::Usage(e.to_string()),
            DataError::Io { .. } => {
                CliError::Runtime { kind: "io".to_string(), message: e.to_string() }
            }
            DataError::Parse { .. } => {
                CliError::Runtime { kind: "parse".to_string(), message: e.to_string() }
            }
            DataError::Empty { .. } => {
                CliError::Runtime { kind: "empty_data".to_string(), message: e.to_string() }
            }
        }
    }
}

/// Run one parsed subcommand.
///
/// # Errors
/// [`CliError::Usage`] for inconsistent flags, [`CliError::Runtime`] for
/// data and numerical failures.
pub fn execute(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Estimate(args) => estimate(args),
        Command::Test(args) => test(args),
        Command::TestOnesided(args) => test_onesided(args),
        Command::Power(args) => power(args),
        Command::Samplesize(args) => samplesize(args),
        Command::Tune(args) => tune(args),
        Command::Simulate(args) => simulate(args),
        Command::Datasets(args) => datasets_cmd(args),
    }
}

fn check_unit_interval(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must lie strictly between 0 and 1, got {value}")))
    }
}

fn check_beta(beta: f64) -> Result<(), CliError> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--beta must be a finite nonnegative real, got {beta}")))
    }
}

fn parse_theta_pair(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if v.len() == 2 && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Usage(format!(
            "--theta-star expects two comma-separated reals, got '{text}'"
        ))),
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    let items: Result<Vec<T>, _> = text.split(',').map(|p| p.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!("--{flag} expects a comma-separated list, got '{text}'"))),
    }
}

fn data_echo(nd: &NamedDataset, source: &str, column: usize) -> Value {
    json!({
        "source": source,
        "name": nd.name,
        "n": nd.values.len(),
        "column": column,
    })
}

fn constraint_echo(constraint: &ConstraintSpec) -> Value {
    match constraint.pinned() {
        Some(pins) => json!({
            "kind": "pin",
            "pins": pins.iter().map(|(i, v)| json!({"coordinate": i, "value": v})).collect::<Vec<_>>(),
            "label": constraint.label(),
        }),
        None => json!({"kind": "general", "label": constraint.label()}),
    }
}

#[derive(Serialize)]
struct FitPayload {
    model: &'static str,
    data: Value,
    beta: f64,
    constraint: Value,
    theta_hat: Vec<f64>,
    objective_value: f64,
    converged: bool,
    iterations: u32,
    gradient_norm: f64,
    lagrange_multipliers: Option<Vec<f64>>,
}

fn fit_payload(
    model: ModelKind,
    data: Value,
    beta: f64,
    constraint: Option<&ConstraintSpec>,
    fit: &EstimationResult,
) -> FitPayload {
    FitPayload {
        model: model.name(),
        data,
        beta,
        constraint: constraint.map(constraint_echo).unwrap_or(Value::Null),
        theta_hat: fit.theta_hat.clone(),
        objective_value: fit.objective_value,
        converged: fit.converged,
        iterations: fit.iterations,
        gradient_norm: fit.gradient_norm,
        lagrange_multipliers: fit.lagrange_multipliers.clone(),
    }
}

fn estimate(args: EstimateArgs) -> Result<Output, CliError> {
    check_beta(args.beta)?;
    let constraint = args.pin.optional_constraint(args.model)?;
    let nd = datasets::resolve(&args.data.data, args.data.column)?;
    let data = nd.to_dataset();
    let model = args.model.model();
    let fit = match &constraint {
        Some(c) => fit_rmdpde(model, &data, args.beta, c, None)?,
        None => fit_mdpde(model, &data, args.beta, None)?,
    };
    let echo = inputs(vec![
        ("model", json!(args.model.name())),
        ("data", json!(args.data.data)),
        ("column", json!(args.data.column)),
        ("beta", json!(args.beta)),
        ("mu0", json!(args.pin.mu0)),
        ("sigma0", json!(args.pin.sigma0)),
    ]);
    let payload = fit_payload(
        args.model,
        data_echo(&nd, &args.data.data, args.data.column),
        args.beta,
        constraint.as_ref(),
        &fit,
    );
    Ok(Output {
        content: Report::new("estimate", echo, payload).to_json(),
        path: args.out.output,
    })
}

#[derive(Serialize)]
struct TestPayload {
    model: &'static str,
    data: Value,
    beta: f64,
    gamma: f64,
    constraint: Value,
    statistic: f64,
    eigenvalues: Vec<f64>,
    p_value: f64,
    critical_value: f64,
    alpha: f64,
    reject: bool,
    theta_hat: Vec<f64>,
    theta_tilde: Vec<f64>,
    method: String,
}

fn test(args: TestArgs) -> Result<Output, CliError> {
    check_beta(args.beta)?;
    check_unit_interval("alpha", args.alpha)?;
    let gamma = args.gamma.unwrap_or(args.beta);
    let constraint = args.pin.constraint(args.model)?;
    let nd = datasets::resolve(&args.data.data, args.data.column)?;
    let data = nd.to_dataset();
    let seed = args.seed.resolve();
    let result = dpd_test(
        args.model.model(),
        &data,
        args.beta,
        gamma,
        &constraint,
        args.alpha,
        args.mc_draws,
        seed,
    )?;
    let echo = inputs(vec![
        ("model", json!(args.model.name())),
        ("data", json!(args.data.data)),
        ("column", json!(args.data.column)),
        ("beta", json!(args.beta)),
        ("gamma", json!(gamma)),
        ("alpha", json!(args.alpha)),
        ("mc_draws", json!(args.mc_draws)),
        ("seed", json!(seed)),
        ("mu0", json!(args.pin.mu0)),
        ("sigma0", json!(args.pin.sigma0)),
    ]);
    let payload = TestPayload {
        model: args.model.name(),
        data: data_echo(&nd, &args.data.data, args.data.column),
        beta: args.beta,
        gamma,
        constraint: constraint_echo(&constraint),
        statistic: result.statistic,
        eigenvalues: result.eigenvalues.clone(),
        p_value: result.p_value,
        critical_value: result.critical_value,
        alpha: result.alpha,
        reject: result.reject(),
        theta_hat: result.theta_hat.clone(),
        theta_tilde: result.theta_tilde.clone(),
        method: result.method,
    };
    Ok(Output { content: Report::new("test", echo, payload).to_json(), path: args.out.output })
}

#[derive(Serialize)]
struct OneSidedPayload {
    model: &'static str,
    data: Value,
    beta: f64,
    gamma: f64,
    mu0: f64,
    direction: &'static str,
    z_statistic: f64,
    eigenvalue: f64,
    p_normal: f64,
    p_t: f64,
    p_half_chi2: f64,
    critical_value: f64,
    alpha: f64,
    reject: bool,
    theta_hat: Vec<f64>,
    theta_tilde: Vec<f64>,
    method: String,
}

fn test_onesided(args: TestOnesidedArgs) -> Result<Output, CliError> {
    check_beta(args.beta)?;
    check_unit_interval("alpha", args.alpha)?;
    let gamma = args.gamma.unwrap_or(args.beta);
    let nd = datasets::resolve(&args.data.data, args.data.column)?;
    let data = nd.to_dataset();
    let result = signed_one_sided_test(
        &dpd_core::models::NormalModel,
        &data,
        args.beta,
        gamma,
        args.mu0,
        args.direction.alternative(),
        args.alpha,
    )?;
    let echo = inputs(vec![
        ("model", json!("normal")),
        ("data", json!(args.data.data)),
        ("column", json!(args.data.column)),
        ("beta", json!(args.beta)),
        ("gamma", json!(gamma)),
        ("alpha", json!(args.alpha)),
        ("mu0", json!(args.mu0)),
        ("direction", json!(args.direction.name())),
    ]);
    let payload = OneSidedPayload {
        model: "normal",
        data: data_echo(&nd, &args.data.data, args.data.column),
        beta: args.beta,
        gamma,
        mu0: args.mu0,
        direction: args.direction.name(),
        z_statistic: result.z.statistic,
        eigenvalue: result.z.eigenvalues[0],
        p_normal: result.z.p_value,
        p_t: result.t_p_value,
        p_half_chi2: result.half_chi2_p_value,
        critical_value: result.z.critical_value,
        alpha: result.z.alpha,
        reject: result.z.reject(),
        theta_hat: result.z.theta_hat.clone(),
        theta_tilde: result.z.theta_tilde.clone(),
        method: result.z.method,
    };
    Ok(Output {
        content: Report::new("test-onesided", echo, payload).to_json(),
        path: args.out.output,
    })
}

#[derive(Serialize)]
struct PowerPayload {
    model: &'static str,
    beta: f64,
    gamma: f64,
    n: u64,
    alpha: f64,
    constraint: Value,
    power: f64,
    critical_value: f64,
    theta_star: Vec<f64>,
    theta_null_star: Vec<f64>,
    divergence_gap: f64,
    sigma2: f64,
}

fn power(args: PowerArgs) -> Result<Output, CliError> {
    check_beta(args.beta)?;
    check_unit_interval("alpha", args.alpha)?;
    let gamma = args.gamma.unwrap_or(args.beta);
    let theta_star = parse_theta_pair(&args.theta_star)?;
    let constraint = args.pin.constraint(args.model)?;
    let seed = args.seed.resolve();
    let report = power_report(
        args.model.model(),
        &theta_star,
        &constraint,
        args.beta,
        gamma,
        args.n,
        args.alpha,
        args.mc_draws,
        seed,
    )?;
    let echo = inputs(vec![
        ("model", json!(args.model.name())),
        ("theta_star", json!(theta_star)),
        ("beta", json!(args.beta)),
        ("gamma", json!(gamma)),
        ("n", json!(args.n)),
        ("alpha", json!(args.alpha)),
        ("mc_draws", json!(args.mc_draws)),
        ("seed", json!(seed)),
        ("mu0", json!(args.pin.mu0)),
        ("sigma0", json!(args.pin.sigma0)),
    ]);
    let payload = PowerPayload {
        model: args.model.name(),
        beta: args.beta,
        gamma,
        n: args.n,
        alpha: args.alpha,
        constraint: constraint_echo(&constraint),
        power: report.power,
        critical_value: report.critical_value,
        theta_star: report.analysis.theta_star.clone(),
        theta_null_star: report.analysis.theta_null_star.clone(),
        divergence_gap: report.analysis.divergence_gap,
        sigma2: report.analysis.sigma2,
    };
    Ok(Output { content: Report::new("power", echo, payload).to_json(), path: args.out.output })
}

#[derive(Serialize)]
struct SampleSizePayload {
    model: &'static str,
    beta: f64,
    gamma: f64,
    alpha: f64,
    target_power: f64,
    constraint: Value,
    n_required: u64,
    critical_value: f64,
    theta_star: Vec<f64>,
    theta_null_star: Vec<f64>,
    divergence_gap: f64,
    sigma2: f64,
}

fn samplesize(args: SamplesizeArgs) -> Result<Output, CliError> {
    check_beta(args.beta)?;
    check_unit_interval("alpha", args.alpha)?;
    check_unit_interval("target-power", args.target_power)?;
    let gamma = args.gamma.unwrap_or(args.beta);
    let theta_star = parse_theta_pair(&args.theta_star)?;
    let constraint = args.pin.constraint(args.model)?;
    let report = sample_size_report(
        args.model.model(),
        &theta_star,
        &constraint,
        args.beta,
        gamma,
        args.alpha,
        args.target_power,
    )?;
    let echo = inputs(vec![
        ("model", json!(args.model.name())),
        ("theta_star", json!(theta_star)),
        ("beta", json!(args.beta)),
        ("gamma", json!(gamma)),
        ("alpha", json!(args.alpha)),
        ("target_power", json!(args.target_power)),
        ("mu0", json!(args.pin.mu0)),
        ("sigma0", json!(args.pin.sigma0)),
    ]);
    let payload = SampleSizePayload {
        model: args.model.name(),
        beta: args.beta,
        gamma,
        alpha: args.alpha,
        target_power: args.target_power,
        constraint: constraint_echo(&constraint),
        n_required: report.n_required,
        critical_value: report.critical_value,
        theta_star: report.analysis.theta_star.clone(),
        theta_null_star: report.analysis.theta_null_star.clone(),
        divergence_gap: report.analysis.divergence_gap,
        sigma2: report.analysis.sigma2,
    };
    Ok(Output {
        content: Report::new("samplesize", echo, payload).to_json(),
        path: args.out.output,
    })
}

#[derive(Serialize)]
struct TuneCurvePoint {
    beta: f64,
    mse: Option<f64>,
}

#[derive(Serialize)]
struct TunePayload {
    model: &'static str,
    data: Value,
    pilot_beta: f64,
    beta_opt: f64,
    theta_opt: Vec<f64>,
    skipped: usize,
    curve: Vec<TuneCurvePoint>,
}

fn tune_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start >= stop
    {
        return Err(CliError::Usage(format!(
            "bad tuning grid: start {start}, stop {stop}, step {step} (need 0 <= start < stop <= 1, step > 0)"
        )));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        // Snap accumulated float error to 10 decimals so grid points
        // print as the decimals the user asked for.
        let v = ((start + f64::from(k) * step) * 1e10).round() / 1e10;
        if v > stop + 1e-12 {
            break;
        }
        grid.push(v.min(stop));
        k += 1;
        if k > 100_000 {
            return Err(CliError::Usage("tuning grid has more than 100000 points".to_string()));
        }
    }
    Ok(grid)
}

fn tune(args: TuneArgs) -> Result<Output, CliError> {
    let grid = tune_grid(args.grid_start, args.grid_stop, args.grid_step)?;
    let nd = datasets::resolve(&args.data.data, args.data.column)?;
    let data = nd.to_dataset();
    let config = TuningConfig { grid, pilot_beta: args.pilot, target: None };
    let result = select_beta(args.model.model(), &data, &config)?;
    let echo = inputs(vec![
        ("model", json!(args.model.name())),
        ("data", json!(args.data.data)),
        ("column", json!(args.data.column)),
        ("pilot", json!(args.pilot)),
        ("grid_start", json!(args.grid_start)),
        ("grid_stop", json!(args.grid_stop)),
        ("grid_step", json!(args.grid_step)),
        ("format", json!(format_name(args.format))),
    ]);
    let content = match args.format {
        Format::Json => {
            let payload = TunePayload {
                model: args.model.name(),
                data: data_echo(&nd, &args.data.data, args.data.column),
                pilot_beta: args.pilot,
                beta_opt: result.beta_opt,
                theta_opt: result.theta_opt.clone(),
                skipped: result.skipped,
                curve: result
                    .mse_curve
                    .iter()
                    .map(|p| TuneCurvePoint { beta: p.beta, mse: p.mse })
                    .collect(),
            };
            Report::new("tune", echo, payload).to_json()
        }
        Format::Csv => {
            let mut s = csv_preamble("tune", &echo);
            s.push_str("beta,mse,selected\n");
            for p in &result.mse_curve {
                let mse = p.mse.map(|m| m.to_string()).unwrap_or_default();
                let selected = p.beta == result.beta_opt && p.mse.is_some();
                s.push_str(&format!("{},{},{}\n", p.beta, mse, selected));
            }
            s
        }
    };
    Ok(Output { content, path: args.out.output })
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn csv_preamble(command: &str, echo: &Map<String, Value>) -> String {
    format!("# dpd {VERSION} {command}\n# inputs: {}\n", Value::Object(echo.clone()))
}

/// Effective worker count: `DPD_THREADS` if set, else the machine's
/// parallelism capped at 8.
fn thread_count() -> Result<usize, CliError> {
    match std::env::var("DPD_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if (1..=256).contains(&n) => Ok(n),
            _ => Err(CliError::Usage(format!(
                "DPD_THREADS must be an integer in 1..=256, got '{raw}'"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get().min(8)).unwrap_or(1)),
    }
}

#[derive(Clone)]
struct CellCounts {
    dpd_hits: Vec<u32>,
    dpd_fail: Vec<u32>,
    t_hits: u32,
    t_fail: u32,
}

impl CellCounts {
    fn new(betas: usize) -> CellCounts {
        CellCounts { dpd_hits: vec![0; betas], dpd_fail: vec![0; betas], t_hits: 0, t_fail: 0 }
    }

    fn merge(&mut self, other: &CellCounts) {
        for (a, b) in self.dpd_hits.iter_mut().zip(&other.dpd_hits) {
            *a += b;
        }
        for (a, b) in self.dpd_fail.iter_mut().zip(&other.dpd_fail) {
            *a += b;
        }
        self.t_hits += other.t_hits;
        self.t_fail += other.t_fail;
    }
}

fn make_row(
    n: usize,
    beta: Option<f64>,
    test: &str,
    hits: u32,
    failures: u32,
    reps: u32,
) -> RejectionRow {
    let rate = f64::from(hits) / f64::from(reps);
    RejectionRow {
        n,
        beta,
        gamma: beta,
        test: test.to_string(),
        rate,
        mc_std_error: (rate * (1.0 - rate) / f64::from(reps)).sqrt(),
        failures,
    }
}

/// Run the plan with replications sharded over `threads` workers.
/// Replication `i` always uses its own stream, so the table is identical
/// for every thread count.
fn run_table(plan: &ExperimentPlan<'_>, threads: usize) -> Result<RejectionTable, CliError> {
    let reps = plan.replications;
    let mut rows = Vec::new();
    for (size_index, &n) in plan.sample_sizes.iter().enumerate() {
        let chunk = reps.div_ceil(threads as u32).max(1);
        let partials: Vec<Result<CellCounts, dpd_core::Error>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let lo = (t as u32).saturating_mul(chunk).min(reps);
                    let hi = ((t as u32 + 1).saturating_mul(chunk)).min(reps);
                    scope.spawn(move || {
                        let mut counts = CellCounts::new(plan.betas.len());
                        for rep in lo..hi {
                            let outcome = run_replication(plan, size_index, rep)?;
                            for (slot, verdict) in outcome.dpd_rejects.iter().enumerate() {
                                match verdict {
                                    Some(true) => counts.dpd_hits[slot] += 1,
                                    Some(false) => {}
                                    None => counts.dpd_fail[slot] += 1,
                                }
                            }
                            match outcome.t_reject {
                                Some(Some(true)) => counts.t_hits += 1,
                                Some(None) => counts.t_fail += 1,
                                _ => {}
                            }
                        }
                        Ok(counts)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("simulation worker panicked")).collect()
        });
        let mut total = CellCounts::new(plan.betas.len());
        for partial in partials {
            total.merge(&partial?);
        }
        for (slot, &beta) in plan.betas.iter().enumerate() {
            rows.push(make_row(n, Some(beta), "dpd", total.dpd_hits[slot], total.dpd_fail[slot], reps));
        }
        if plan.baseline_t {
            rows.push(make_row(n, None, "t", total.t_hits, total.t_fail, reps));
        }
    }
    Ok(RejectionTable { rows, replications: reps, alpha: plan.alpha })
}

#[derive(Serialize)]
struct SimulateRow {
    n: usize,
    beta: Option<f64>,
    gamma: Option<f64>,
    test: String,
    rate: f64,
    mc_std_error: f64,
    failures: u32,
}

#[derive(Serialize)]
struct SimulatePayload {
    model: &'static str,
    scenario: String,
    alpha: f64,
    replications: u32,
    threads: usize,
    rows: Vec<SimulateRow>,
}

fn simulate(args: SimulateArgs) -> Result<Output, CliError> {
    check_unit_interval("alpha", args.alpha)?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".to_string()));
    }
    let betas: Vec<f64> = parse_list("betas", &args.betas)?;
    if betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(CliError::Usage(format!("--betas must lie in [0, 1], got '{}'", args.betas)));
    }
    let sizes: Vec<usize> = parse_list("sizes", &args.sizes)?;
    if sizes.iter().any(|&n| n < 2) {
        return Err(CliError::Usage(format!("--sizes must all be >= 2, got '{}'", args.sizes)));
    }
    let components = scenario::parse(&args.scenario).map_err(CliError::Usage)?;
    let mixture = scenario::build(&components, &args.scenario).map_err(CliError::Usage)?;
    let constraint = args.pin.constraint(args.model)?;
    if args.t_baseline
        && !matches!(constraint.pinned(), Some(pins) if pins.iter().any(|&(i, _)| i == 0))
    {
        return Err(CliError::Usage(
            "--t-baseline needs a location pin (--mu0) to test against".to_string(),
        ));
    }
    let seed = args.seed.resolve();
    let threads = thread_count()?;
    let plan = ExperimentPlan {
        scenario: mixture,
        model: args.model.model(),
        hypothesis: constraint,
        betas,
        sample_sizes: sizes,
        replications: args.reps,
        alpha: args.alpha,
        master_seed: seed,
        baseline_t: args.t_baseline,
    };
    let table = run_table(&plan, threads)?;

    let echo = inputs(vec![
        ("model", json!(args.model.name())),
        ("scenario", json!(args.scenario)),
        ("betas", json!(plan.betas)),
        ("sizes", json!(plan.sample_sizes)),
        ("reps", json!(args.reps)),
        ("alpha", json!(args.alpha)),
        ("seed", json!(seed)),
        ("t_baseline", json!(args.t_baseline)),
        ("mu0", json!(args.pin.mu0)),
        ("sigma0", json!(args.pin.sigma0)),
        ("threads", json!(threads)),
        ("format", json!(format_name(args.format))),
    ]);
    let content = match args.format {
        Format::Json => {
            let payload = SimulatePayload {
                model: args.model.name(),
                scenario: args.scenario.clone(),
                alpha: table.alpha,
                replications: table.replications,
                threads,
                rows: table
                    .rows
                    .iter()
                    .map(|r| SimulateRow {
                        n: r.n,
                        beta: r.beta,
                        gamma: r.gamma,
                        test: r.test.clone(),
                        rate: r.rate,
                        mc_std_error: r.mc_std_error,
                        failures: r.failures,
                    })
                    .collect(),
            };
            Report::new("simulate", echo, payload).to_json()
        }
        Format::Csv => {
            let mut s = csv_preamble("simulate", &echo);
            s.push_str("n,beta,gamma,test,rate,stderr,failures\n");
            for r in &table.rows {
                let beta = r.beta.map(|b| b.to_string()).unwrap_or_default();
                let gamma = r.gamma.map(|g| g.to_string()).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.n, beta, gamma, r.test, r.rate, r.mc_std_error, r.failures
                ));
            }
            s
        }
    };
    Ok(Output { content, path: args.out.output })
}

#[derive(Serialize)]
struct DatasetSummary {
    name: String,
    n: usize,
    source: String,
}

fn datasets_cmd(args: DatasetsArgs) -> Result<Output, CliError> {
    match &args.name {
        None => {
            let list: Vec<DatasetSummary> = datasets::BUILTIN_NAMES
                .iter()
                .map(|name| {
                    let ds = datasets::load_builtin(name).expect("built-ins load");
                    DatasetSummary { name: ds.name, n: ds.values.len(), source: ds.source }
                })
                .collect();
            let echo = inputs(vec![
                ("name", Value::Null),
                ("format", json!(format_name(args.format.unwrap_or(Format::Json)))),
            ]);
            match args.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let payload = json!({ "datasets": list });
                    Ok(Output {
                        content: Report::new("datasets", echo, payload).to_json(),
                        path: args.out.output,
                    })
                }
                Format::Csv => {
                    let mut s = csv_preamble("datasets", &echo);
                    s.push_str("name,n,source\n");
                    for d in list {
                        s.push_str(&format!("{},{},\"{}\"\n", d.name, d.n, d.source));
                    }
                    Ok(Output { content: s, path: args.out.output })
                }
            }
        }
        Some(name) => {
            let ds = datasets::load_builtin(name)?;
            match args.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    // Pure CSV (no comment lines) so the dump reloads
                    // through --data bit-exactly.
                    let mut buffer = Vec::new();
                    datasets::write_csv(&ds, &mut buffer)
                        .map_err(|e| CliError::Runtime {
                            kind: "io".to_string(),
                            message: e.to_string(),
                        })?;
                    Ok(Output {
                        content: String::from_utf8(buffer).expect("CSV is UTF-8"),
                        path: args.out.output,
                    })
                }
                Format::Json => {
                    let echo = inputs(vec![
                        ("name", json!(name)),
                        ("format", json!("json")),
                    ]);
                    let payload = json!({
                        "name": ds.name,
                        "n": ds.values.len(),
                        "source": ds.source,
                        "values": ds.values,
                    });
                    Ok(Output {
                        content: Report::new("datasets", echo, payload).to_json(),
                        path: args.out.output,
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_pair_parsing() {
        assert_eq!(parse_theta_pair("0.3, 1.0").unwrap(), vec![0.3, 1.0]);
        assert!(parse_theta_pair("1").is_err());
        assert!(parse_theta_pair("a,b").is_err());
        assert!(parse_theta_pair("1,2,3").is_err());
    }

    #[test]
    fn list_parsing() {
        let sizes: Vec<usize> = parse_list("sizes", "30, 100").unwrap();
        assert_eq!(sizes, vec![30, 100]);
        assert!(parse_list::<usize>("sizes", "").is_err());
        assert!(parse_list::<f64>("betas", "0.1,,0.3").is_err());
    }

    #[test]
    fn tune_grid_has_inclusive_endpoints() {
        let grid = tune_grid(0.0, 1.0, 0.01).unwrap();
        assert_eq!(grid.len(), 101);
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 1.0);
        assert!(tune_grid(0.5, 0.2, 0.01).is_err());
        assert!(tune_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cell_counts_merge_componentwise() {
        let mut a = CellCounts::new(2);
        a.dpd_hits = vec![1, 2];
        a.t_hits = 3;
        let mut b = CellCounts::new(2);
        b.dpd_hits = vec![10, 20];
        b.dpd_fail = vec![1, 0];
        b.t_fail = 2;
        a.merge(&b);
        assert_eq!(a.dpd_hits, vec![11, 22]);
        assert_eq!(a.dpd_fail, vec![1, 0]);
        assert_eq!(a.t_hits, 3);
        assert_eq!(a.t_fail, 2);
    }
}
