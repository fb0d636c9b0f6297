//! `relboost`: generate data, train cost-sensitive boosted relational
//! models, score and evaluate them.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relboost::Error;

/// Caps the worker thread count when set.
const THREADS_ENV: &str = "RELBOOST_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "relboost",
    version,
    about = "Cost-sensitive relational gradient boosting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset directory.
    Gen {
        /// Generator settings (`key=value` lines); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the generator settings.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add commSkill/commClass/commCity facts to a dataset's fact files.
    Induce {
        #[arg(long)]
        data: PathBuf,
        /// Output dataset directory (may not be the input directory).
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on the training side of a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Score examples with a trained model.
    Predict {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Which side of the split to score.
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Evaluate a trained model and write a metrics report.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Report table; a `.csv` file with the same stem is written too.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value = "test")]
        split: Split,
    },
    /// Train and evaluate over an (alpha, beta) grid.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated alpha values.
        #[arg(long, default_value = "0")]
        alphas: String,
        /// Comma-separated beta values.
        #[arg(long, default_value = "0,1,2")]
        betas: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[command(flatten)]
        train: TrainArgs,
    },
}

#[derive(Debug, Clone, Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 20)]
    stages: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long = "min-leaf", default_value_t = 8)]
    min_leaf: usize,
    /// `content` or `hybrid`.
    #[arg(long, default_value = "hybrid")]
    preset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Split {
    Train,
    Test,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Parse { .. } => 3,
        Error::Schema(_) => 4,
        Error::Training(_) => 5,
        Error::Evaluation(_) => 6,
        Error::Model(_) => 7,
        Error::Domain(_) => 8,
        Error::Io(_) => 9,
        Error::Clause(_) => 10,
    }
}

fn configure_threads() -> relboost::Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relboost: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
