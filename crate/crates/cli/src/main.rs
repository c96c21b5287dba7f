use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// DeGroot opinion dynamics: simulation, closed-form error predictions,
/// phase sweeps, verification and reanalysis of estimation experiments.
#[derive(Debug, Parser)]
#[command(name = "degroot", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run DeGroot updating to convergence and summarize the crowd
    Simulate(SimulateArgs),
    /// Closed-form asymptotic changes and improvement verdicts
    Predict(PredictArgs),
    /// Phase grid of predicted error changes
    Sweep(SweepArgs),
    /// Compare closed-form predictions with simulation on a random ensemble
    Verify(VerifyArgs),
    /// Reanalyze pre/post trial data
    Reanalyze(ReanalyzeArgs),
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// CSV weight matrix, or a generator: uniform, dictator, star, random
    #[arg(long)]
    pub network: String,
    /// Agent count for generated networks
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for generated networks and opinions
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.9)]
    pub dominance: f64,
    #[arg(long, default_value_t = 0.5)]
    pub hub_weight: f64,
    #[arg(long, default_value_t = 0.05)]
    pub min_self_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    pub concentration: f64,
    /// One-column CSV of initial opinions; drawn uniformly from [-10, 10]
    /// with --seed when absent
    #[arg(long)]
    pub opinions: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub truth: f64,
    /// Power iteration tolerance
    #[arg(long, default_value_t = 1e-12)]
    pub eig_tol: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    /// Keep every intermediate state in the trajectory
    #[arg(long)]
    pub record: bool,
    /// Directory for trajectory.csv and stats.json; JSON goes to stdout otherwise
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxesKind {
    CalibrationHerding,
    AlphaZ,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2.0)]
    pub cv: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub z: f64,
    #[arg(long, default_value_t = 1.0)]
    pub se: f64,
    #[arg(long, default_value_t = 1.0)]
    pub se2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd2: f64,
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = AxesKind::CalibrationHerding)]
    pub axes: AxesKind,
    /// First axis range "lo,hi" (calibration, or alpha)
    #[arg(long, allow_hyphen_values = true)]
    pub range1: Option<String>,
    /// Second axis range "lo,hi" (herding, or z)
    #[arg(long, allow_hyphen_values = true)]
    pub range2: Option<String>,
    /// Grid CSV path; a .json sidecar is written next to it. CSV goes to
    /// stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub nmax: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Relative tolerance for analytic vs simulated changes
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub sim_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricChoice {
    Both,
    Conditional,
    ImproveOrStay,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupRuleChoice {
    Both,
    Strict,
    NotWorse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FilterChoice {
    Threshold,
    PositiveOffset,
}

#[derive(Debug, Args)]
pub struct ReanalyzeArgs {
    /// Trial CSV
    pub trials: PathBuf,
    /// Drop trials whose standardized changes exceed this magnitude
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = FilterChoice::Threshold)]
    pub filter: FilterChoice,
    #[arg(long, value_enum, default_value_t = MetricChoice::Both)]
    pub metric: MetricChoice,
    #[arg(long, value_enum, default_value_t = GroupRuleChoice::Both)]
    pub group_rule: GroupRuleChoice,
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for report.json, changes.csv, improvement.csv, quartiles.csv;
    /// report JSON goes to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status: 0 success, 1 validation failure, 2 verification tolerance
/// exceeded, 3 I/O error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Validation = 1,
    Verification = 2,
    Io = 3,
}

impl Failure {
    fn kind(self) -> &'static str {
        match self {
            Failure::Validation => "validation",
            Failure::Verification => "verification",
            Failure::Io => "io",
        }
    }
}

pub struct CliError {
    pub failure: Failure,
    pub message: String,
}

impl From<degroot_core::Error> for CliError {
    fn from(e: degroot_core::Error) -> Self {
        let failure = if e.is_io() {
            Failure::Io
        } else {
            Failure::Validation
        };
        CliError {
            failure,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            failure: Failure::Io,
            message: e.to_string(),
        }
    }
}

fn report(err: &CliError) -> ExitCode {
    let line = serde_json::json!({
        "error": err.failure.kind(),
        "code": err.failure as u8,
        "message": err.message,
    });
    eprintln!("{line}");
    ExitCode::from(err.failure as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string().lines().next().unwrap_or_default().to_string();
            return report(&CliError {
                failure: Failure::Validation,
                message,
            });
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
