//! `renseq` binary: sequence generation, correlation solvers, likelihood
//! reports, estimation, and the figure-data pipeline.
//!
//! Exit codes: 0 ok, 2 configuration error (bad flags, unreadable files,
//! invalid model parameters), 3 numerical error (e.g. a covariance with no
//! renewal representation). Failures print a machine-readable JSON line on
//! stderr.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "renseq", version, about = "Stationary binary sequences from renewal processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum Command {
    /// Generate binary sequences from a model.
    Generate(GenerateArgs),
    /// Solve the renewal equation: pair probabilities, autocovariance, and
    /// the subexponential tail proxy.
    Autocov(AutocovArgs),
    /// Invert a prescribed covariance into its waiting-time density.
    Invert(InvertArgs),
    /// Entropy summary of a model.
    Entropy(EntropyArgs),
    /// Log-likelihood and equipartition statistic of a sequence file.
    Loglik(LoglikArgs),
    /// Estimate the waiting-time density, autocovariance, or symbol mean
    /// from a sequence, with CLT error bars.
    Estimate(EstimateArgs),
    /// Upper bounds on the strong-mixing coefficients.
    Mixing(MixingArgs),
    /// Regenerate the CSV data behind the six reference figures.
    Figures(FiguresArgs),
}

#[derive(Args, Serialize)]
pub struct GenerateArgs {
    /// Model descriptor JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Number of symbols per sequence.
    #[arg(long)]
    pub length: usize,
    /// Base seed; replica k uses the derived stream seed (seed, k).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of independent replicas.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    /// Worker threads for replica generation (0 = available parallelism).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Output file (single replica) or stem (several replicas).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a plain 0/1 text rendering next to each output.
    #[arg(long, default_value_t = false)]
    pub text: bool,
}

#[derive(Args, Serialize)]
pub struct AutocovArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Largest lag to solve for.
    #[arg(long, default_value_t = 2_000)]
    pub horizon: usize,
    /// Output CSV (t, c, rho, tail_proxy).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct InvertArgs {
    /// Inverse-family model descriptor JSON.
    #[arg(long, conflicts_with = "covariance")]
    pub model: Option<PathBuf>,
    /// Raw covariance CSV: lines of `c` or `t,c`, starting at t = 0.
    #[arg(long)]
    pub covariance: Option<PathBuf>,
    /// Recursion horizon for raw covariance input.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Clip tolerance relative to c_0.
    #[arg(long, default_value_t = 1e-10)]
    pub clip_tol: f64,
    /// Output density CSV (s, p) with a provenance header.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EntropyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Block length for the finite-dimensional entropy.
    #[arg(long, default_value_t = 64)]
    pub block: usize,
    /// Optional output JSON file (also printed to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct LoglikArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Sequence file (RBSQ format).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EstimateTargetArg {
    P,
    Rho,
    Mean,
}

#[derive(Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Which quantity to estimate.
    #[arg(long, value_enum)]
    pub target: EstimateTargetArg,
    /// Single index (gap s or lag tau).
    #[arg(long)]
    pub index: Option<usize>,
    /// Estimate all indices up to this one.
    #[arg(long)]
    pub max_index: Option<usize>,
    /// Output CSV (target, index, estimate, truth, v, half_width, t).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct MixingArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Largest lag to bound.
    #[arg(long, default_value_t = 64)]
    pub max_lag: usize,
    /// Autocovariance horizon feeding the tail sums (0 = auto).
    #[arg(long, default_value_t = 0)]
    pub rho_horizon: usize,
    /// Convergence requirement on the last decade of the tail sums.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Output CSV (t, alpha_bound, partial_sum).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct FiguresArgs {
    /// Output directory for fig1.csv .. fig6.csv and provenance.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shrink sequence lengths 100x (1e5 and 1e6 symbols instead of 1e6
    /// and 1e8) to keep the run in desk time.
    #[arg(long, default_value_t = false)]
    pub desk_scale: bool,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// Error classes mapped to exit codes.
pub enum CliError {
    Config(String),
    Numerical(renseq::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(msg) => msg.clone(),
            CliError::Numerical(err) => err.to_string(),
        }
    }
}

impl From<renseq::Error> for CliError {
    fn from(err: renseq::Error) -> Self {
        use renseq::Error::*;
        match err {
            // Invalid inputs and model parameters are configuration
            // problems; everything else is a numerical failure.
            NegativeMass { .. } | NonFiniteMass { .. } | ZeroDistribution
            | MassExceedsOne { .. } | InfiniteMean | MassMismatch { .. }
            | InvalidLambda { .. } | InvalidExponent { .. } | InvalidScale { .. }
            | TailExceedsOne { .. } | InvalidMean { .. } | SpecViolation { .. }
            | Model(_) => CliError::Config(err.to_string()),
            Io(e) => CliError::Config(format!("i/o: {e}")),
            MalformedSequenceFile(_) => CliError::Config(err.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {err}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::json!({
                    "error": err.kind(),
                    "message": err.message(),
                })
            );
            ExitCode::from(err.exit_code())
        }
    }
}
