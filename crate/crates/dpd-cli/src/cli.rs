//! Argument surface and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use dpd_core::models::{ConstraintSpec, NormalModel, ParametricModel, WeibullModel};
use dpd_core::testing::Alternative;

use crate::commands::{self, CliError, Output};
use crate::report::ErrorReport;

/// Fixed default seed: default runs are reproducible; pass
/// `--random-seed` to opt into entropy.
pub const DEFAULT_SEED: u64 = 24601;
/// Default Monte Carlo draws for mixture quantiles.
pub const DEFAULT_MC_DRAWS: u64 = 1_000_000;

static NORMAL: NormalModel = NormalModel;
static WEIBULL: WeibullModel = WeibullModel;

/// Robust estimation and composite testing via the density power
/// divergence.
#[derive(Debug, Parser)]
#[command(
    name = "dpd",
    version,
    about = "Robust estimation and composite hypothesis testing via the density power divergence",
    propagate_version = true
)]
pub struct Cli {
    /// The subcommand to run.
    #[command(subcommand)]
    pub command: Command,
}

/// All subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the minimum density power divergence estimator (optionally
    /// restricted by a pin)
    Estimate(EstimateArgs),
    /// Two-sided DPD test of a pinned-parameter null
    Test(TestArgs),
    /// Signed one-sided DPD test for the normal location
    TestOnesided(TestOnesidedArgs),
    /// Approximate power at a fixed alternative
    Power(PowerArgs),
    /// Smallest sample size reaching a target power
    Samplesize(SamplesizeArgs),
    /// Select beta by the pilot-based MSE criterion
    Tune(TuneArgs),
    /// Seeded Monte Carlo level/power experiment
    Simulate(SimulateArgs),
    /// List built-in datasets or dump one as CSV
    Datasets(DatasetsArgs),
}

impl Command {
    /// The subcommand's report name.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate(_) => "estimate",
            Command::Test(_) => "test",
            Command::TestOnesided(_) => "test-onesided",
            Command::Power(_) => "power",
            Command::Samplesize(_) => "samplesize",
            Command::Tune(_) => "tune",
            Command::Simulate(_) => "simulate",
            Command::Datasets(_) => "datasets",
        }
    }
}

/// Model family flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Normal with θ = (μ, σ).
    Normal,
    /// Weibull with θ = (σ, p).
    Weibull,
}

impl ModelKind {
    /// The backing model object.
    pub fn model(self) -> &'static dyn ParametricModel {
        match self {
            ModelKind::Normal => &NORMAL,
            ModelKind::Weibull => &WEIBULL,
        }
    }

    /// The family name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Normal => "normal",
            ModelKind::Weibull => "weibull",
        }
    }
}

/// Output format flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Self-contained JSON report.
    Json,
    /// Plot-ready CSV (with `#` echo comments, except dataset dumps).
    Csv,
}

/// One-sided direction flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// H₁: the location exceeds μ₀.
    Greater,
    /// H₁: the location falls below μ₀.
    Less,
}

impl Direction {
    /// The core alternative.
    pub fn alternative(self) -> Alternative {
        match self {
            Direction::Greater => Alternative::Greater,
            Direction::Less => Alternative::Less,
        }
    }

    /// The flag's report name.
    pub fn name(self) -> &'static str {
        match self {
            Direction::Greater => "greater",
            Direction::Less => "less",
        }
    }
}

/// `--data` source plus CSV column selector.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Data source: `builtin:<name>` or a CSV path
    #[arg(long)]
    pub data: String,
    /// 0-based column for CSV sources
    #[arg(long, default_value_t = 0)]
    pub column: usize,
}

/// Null-pin flags.
#[derive(Debug, Args)]
pub struct PinArgs {
    /// Null value for the location μ (normal only)
    #[arg(long)]
    pub mu0: Option<f64>,
    /// Null value for the scale σ
    #[arg(long)]
    pub sigma0: Option<f64>,
}

impl PinArgs {
    /// Resolve the pin into a constraint for the given family.
    ///
    /// # Errors
    /// [`CliError::Usage`] unless exactly one applicable pin was given.
    pub fn constraint(&self, model: ModelKind) -> Result<ConstraintSpec, CliError> {
        match (model, self.mu0, self.sigma0) {
            (ModelKind::Normal, Some(mu0), None) => {
                Ok(ConstraintSpec::pin(0, mu0, format!("mu = {mu0}")))
            }
            (ModelKind::Normal, None, Some(sigma0)) => {
                Ok(ConstraintSpec::pin(1, sigma0, format!("sigma = {sigma0}")))
            }
            (ModelKind::Weibull, None, Some(sigma0)) => {
                Ok(ConstraintSpec::pin(0, sigma0, format!("sigma = {sigma0}")))
            }
            (ModelKind::Weibull, Some(_), _) => Err(CliError::Usage(
                "--mu0 applies to the normal model; pin the Weibull scale with --sigma0"
                    .to_string(),
            )),
            (_, Some(_), Some(_)) => {
                Err(CliError::Usage("give exactly one of --mu0 / --sigma0".to_string()))
            }
            (_, None, None) => {
                Err(CliError::Usage("a null pin is required: --mu0 or --sigma0".to_string()))
            }
        }
    }

    /// The pin as an optional constraint (for `estimate`).
    ///
    /// # Errors
    /// [`CliError::Usage`] when both pins are given or a pin does not
    /// apply to the family.
    pub fn optional_constraint(
        &self,
        model: ModelKind,
    ) -> Result<Option<ConstraintSpec>, CliError> {
        if self.mu0.is_none() && self.sigma0.is_none() {
            return Ok(None);
        }
        self.constraint(model).map(Some)
    }
}

/// Seed flags.
#[derive(Debug, Args)]
pub struct SeedArgs {
    /// RNG master seed (fixed default keeps runs reproducible)
    #[arg(long, default_value_t = DEFAULT_SEED, conflicts_with = "random_seed")]
    pub seed: u64,
    /// Draw the seed from system entropy instead
    #[arg(long)]
    pub random_seed: bool,
}

impl SeedArgs {
    /// The effective seed (echoed in the report).
    pub fn resolve(&self) -> u64 {
        if self.random_seed {
            let nanos = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0x9E37_79B9_7F4A_7C15);
            nanos ^ (u64::from(std::process::id())).rotate_left(32)
        } else {
            self.seed
        }
    }
}

/// Output redirection flag.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report to this file instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// `estimate` arguments.
#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Model family
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Data source selection.
    #[command(flatten)]
    pub data: DataArgs,
    /// Tuning parameter β ≥ 0 (0 = maximum likelihood)
    #[arg(long)]
    pub beta: f64,
    /// Null-hypothesis pins.
    #[command(flatten)]
    pub pin: PinArgs,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `test` arguments.
#[derive(Debug, Args)]
pub struct TestArgs {
    /// Model family
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Data source selection.
    #[command(flatten)]
    pub data: DataArgs,
    /// Estimation tuning parameter β ≥ 0
    #[arg(long)]
    pub beta: f64,
    /// Divergence tuning parameter γ (defaults to β)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Null-hypothesis pins.
    #[command(flatten)]
    pub pin: PinArgs,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Monte Carlo draws for multi-pin mixture calibration
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub mc_draws: u64,
    /// Random-seed selection.
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `test-onesided` arguments.
#[derive(Debug, Args)]
pub struct TestOnesidedArgs {
    /// Data source selection.
    #[command(flatten)]
    pub data: DataArgs,
    /// Estimation tuning parameter β ≥ 0
    #[arg(long)]
    pub beta: f64,
    /// Divergence tuning parameter γ (defaults to β)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Null location μ₀ (normal model)
    #[arg(long)]
    pub mu0: f64,
    /// Direction of the alternative
    #[arg(long, value_enum)]
    pub direction: Direction,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `power` arguments.
#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Model family
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Fixed alternative, e.g. `--theta-star 0.3,1.0`
    #[arg(long)]
    pub theta_star: String,
    /// Null-hypothesis pins.
    #[command(flatten)]
    pub pin: PinArgs,
    /// Estimation tuning parameter β ≥ 0
    #[arg(long)]
    pub beta: f64,
    /// Divergence tuning parameter γ (defaults to β)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sample size the power is evaluated at
    #[arg(long)]
    pub n: u64,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Monte Carlo draws for multi-pin mixture calibration
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub mc_draws: u64,
    /// Random-seed selection.
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `samplesize` arguments.
#[derive(Debug, Args)]
pub struct SamplesizeArgs {
    /// Model family
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Fixed alternative, e.g. `--theta-star 0.3,1.0`
    #[arg(long)]
    pub theta_star: String,
    /// Null-hypothesis pins.
    #[command(flatten)]
    pub pin: PinArgs,
    /// Estimation tuning parameter β ≥ 0
    #[arg(long)]
    pub beta: f64,
    /// Divergence tuning parameter γ (defaults to β)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Target power π ∈ (0, 1)
    #[arg(long)]
    pub target_power: f64,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `tune` arguments.
#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Model family
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Data source selection.
    #[command(flatten)]
    pub data: DataArgs,
    /// Pilot estimator's β
    #[arg(long, default_value_t = 0.5)]
    pub pilot: f64,
    /// Grid start
    #[arg(long, default_value_t = 0.0)]
    pub grid_start: f64,
    /// Grid stop (inclusive)
    #[arg(long, default_value_t = 1.0)]
    pub grid_stop: f64,
    /// Grid step
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Output format (CSV emits the MSE curve)
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `simulate` arguments.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model family the tests fit
    #[arg(long, value_enum, default_value_t = ModelKind::Normal)]
    pub model: ModelKind,
    /// Data-generating mixture, e.g. `0.9*normal(0,1)+0.1*normal(-10,1)`
    #[arg(long)]
    pub scenario: String,
    /// Null-hypothesis pins.
    #[command(flatten)]
    pub pin: PinArgs,
    /// Comma-separated β values (each tested with γ = β)
    #[arg(long, default_value = "0,0.15,0.25")]
    pub betas: String,
    /// Comma-separated sample sizes
    #[arg(long)]
    pub sizes: String,
    /// Replications per (n, β) cell
    #[arg(long, default_value_t = 1000)]
    pub reps: u32,
    /// Nominal level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Also run the two-sided Student t baseline (location pins only)
    #[arg(long)]
    pub t_baseline: bool,
    /// Random-seed selection.
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// `datasets` arguments.
#[derive(Debug, Args)]
pub struct DatasetsArgs {
    /// Dump this built-in instead of listing all of them
    #[arg(long)]
    pub name: Option<String>,
    /// Output format (dumps default to reload-able CSV, listings to JSON)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output destination.
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Parse argv, run, and map the outcome to an exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let command = cli.command.name();
    match commands::execute(cli.command) {
        Ok(output) => match write_output(&output) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: cannot write output: {e}");
                1
            }
        },
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            2
        }
        Err(CliError::Runtime { kind, message }) => {
            print!("{}", ErrorReport::new(command, &kind, message).to_json());
            1
        }
    }
}

fn write_output(output: &Output) -> std::io::Result<()> {
    match &output.path {
        Some(path) => std::fs::write(path, output.content.as_bytes()),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(output.content.as_bytes())?;
            lock.flush()
        }
    }
}
