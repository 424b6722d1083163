//! `local-match`: corpus generation, query runs, simulation and verification.
//!
//! Exit codes: 0 on success, 1 on bad input, 2 on a validation violation,
//! 3 on a budget or resource error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use local_match::experiment::Algorithm;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "local-match", version, about = "Stateless local algorithms for approximate matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a corpus graph in the text graph format.
    Generate(GenerateArgs),
    /// Color every vertex.
    Color(GraphArgs),
    /// Orient every edge by the coloring.
    Orient(GraphArgs),
    /// Maximal independent set of the input graph.
    Mis(GraphArgs),
    /// Approximate maximum cardinality matching.
    Mcm(EpsArgs),
    /// Approximate maximum weight matching.
    Mwm(EpsArgs),
    /// Run an algorithm through the round simulator.
    Simulate(SimulateArgs),
    /// Validate an answers file, or run every validator on fresh answers.
    Verify(VerifyArgs),
    /// Emit one metrics record per corpus cell.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EpsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Approximation parameter, as `1/2` or `0.5`.
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Ring,
    Path,
    Grid,
    Regular,
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Unit,
    Pow2,
    Rational,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Number of vertices; ignored for grids.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub rows: usize,
    #[arg(long, default_value_t = 8)]
    pub cols: usize,
    /// Degree of a random regular graph.
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = WeightArg::Unit)]
    pub weights: WeightArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgArg {
    Mis,
    Mcm,
    Mwm,
}

impl From<AlgArg> for Algorithm {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::Mis => Algorithm::Mis,
            AlgArg::Mcm => Algorithm::Mcm,
            AlgArg::Mwm => Algorithm::Mwm,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub alg: AlgArg,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// JSON answers written by `color`, `orient`, `mis`, `mcm`, `mwm` or
    /// `simulate`. Without it every algorithm is run and validated.
    #[arg(long)]
    pub answers: Option<PathBuf>,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Restrict to one algorithm.
    #[arg(long, value_enum)]
    pub alg: Option<AlgArg>,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    /// Seed of the random regular graphs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest unweighted instance.
    #[arg(long, default_value_t = 256)]
    pub max_n: usize,
    /// Also run the round simulator.
    #[arg(long)]
    pub simulate: bool,
    /// Record wall-clock time (makes records non-reproducible).
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] local_match::error::Error),
    #[error("validation failed: {0}")]
    Violation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed answers: {0}")]
    Answers(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_resource() => 3,
            CliError::Violation(_) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match local_match::par::with_stack(|| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
