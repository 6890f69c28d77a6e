//! `sparsekit` subcommands. Every command writes CSV with a fixed header.

mod analyze;
mod args;
mod attention;
mod bench;
mod check;
mod simulate;
mod workload;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use sparsekit_core::SparseError;
use thiserror::Error;

use crate::io::ReadError;

pub use analyze::{histogram, AnalyzeArgs, BinScale, HistogramBin, ANALYZE_HEADER};
pub use args::{parse_dims, KernelArg, PrecisionArg, ProblemArgs, RunArgs, TileArgs, ToggleArgs};
pub use attention::{AttentionArgs, ATTENTION_HEADER};
pub use bench::{AblateArgs, BenchArgs, ABLATE_HEADER, BENCH_HEADER};
pub use check::{check_grid, CheckArgs, CheckCell, GridOptions, CHECK_HEADER};
pub use simulate::{default_covs, SimulateArgs, SIMULATE_HEADER};

#[derive(Parser, Debug)]
#[command(
    name = "sparsekit",
    version,
    about = "Sparse kernel benchmarks, checks, corpus statistics and scheduler simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Time one kernel on one problem.
    Bench(BenchArgs),
    /// Time the full kernel and each single-optimization-off variant.
    Ablate(AblateArgs),
    /// Run the oracle-equivalence grid.
    Check(CheckArgs),
    /// Row-length statistics of matrix files or directories.
    Analyze(AnalyzeArgs),
    /// Scheduler simulation over a sweep of row-length variation.
    Simulate(SimulateArgs),
    /// Time the sparse attention pipeline stage by stage.
    AttentionBench(AttentionArgs),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("{}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Kernel(#[from] SparseError),
    #[error("{0}")]
    NoInput(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1: a check failed, 2: bad arguments, 3: IO.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Failed(_) => 1,
            Self::Usage(_) | Self::Kernel(_) => 2,
            Self::Read(_) | Self::Output { .. } | Self::Csv(_) | Self::NoInput(_) => 3,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bench(a) => bench::run_bench(&a),
        Command::Ablate(a) => bench::run_ablate(&a),
        Command::Check(a) => check::run_check(&a),
        Command::Analyze(a) => analyze::run_analyze(&a),
        Command::Simulate(a) => simulate::run_simulate(&a),
        Command::AttentionBench(a) => attention::run_attention(&a),
    }
}

/// CSV writer on `path`, or stdout when absent.
pub(crate) fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Output {
            path: p.to_owned(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        v.to_string()
    }
}
