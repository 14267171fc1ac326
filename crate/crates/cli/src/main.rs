//! `twofold` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::Config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Data(#[from] twofold::data::DataError),
    #[error(transparent)]
    Feature(#[from] twofold::features::FeatureError),
    #[error(transparent)]
    Learner(#[from] twofold::learners::LearnerError),
    #[error(transparent)]
    Hurdle(#[from] twofold::hurdle::HurdleError),
    #[error(transparent)]
    Harness(#[from] twofold::harness::HarnessError),
    #[error(transparent)]
    Metric(#[from] twofold::metrics::MetricError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "twofold", version, about = "Two-fold (hurdle) forecasting for sparse series")]
pub struct Cli {
    /// INI-style config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic zero-inflated Poisson series as CSV.
    Generate(GenerateArgs),
    /// Fit a two-fold model on a single series and save it as JSON.
    Train(TrainArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Rolling-origin evaluation of the default model set on CSV input.
    Evaluate(EvaluateArgs),
    /// Full comparison over local and global scopes with significance tests.
    Benchmark(BenchmarkArgs),
    /// Theoretical energy consumption of a prediction workload.
    Tec(TecArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Structural-zero probability.
    #[arg(long, allow_negative_numbers = true)]
    pub pi: Option<f64>,
    /// Poisson rate.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Number of hourly rows.
    #[arg(long)]
    pub n: Option<usize>,
    /// flat, commuter or shuttle.
    #[arg(long)]
    pub calendar: Option<String>,
    /// First timestamp (RFC 3339).
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub series_id: Option<String>,
    /// Output file name inside the output directory.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DataArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub timestamp_col: Option<String>,
    #[arg(long)]
    pub target_col: Option<String>,
    /// Column identifying the series in multi-series files.
    #[arg(long)]
    pub series_col: Option<String>,
    /// Sum rows into buckets of this many hours.
    #[arg(long)]
    pub bucket_hours: Option<u32>,
    /// Newline-separated ISO dates flagged as holidays.
    #[arg(long)]
    pub holidays: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Occurrence classifier: logistic, hgb or mlp.
    #[arg(long)]
    pub classifier: Option<String>,
    /// Conditional regressor: linear, hgb, mlp or zero.
    #[arg(long)]
    pub regressor: Option<String>,
    /// Fit the regressor on raw values instead of log1p.
    #[arg(long)]
    pub no_target_transform: bool,
    /// Model file name inside the output directory.
    #[arg(long)]
    pub model_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Rows to predict; actuals are echoed next to the predictions.
    #[command(flatten)]
    pub data: DataArgs,
    /// First timestamp to forecast when no input is given.
    #[arg(long)]
    pub from: Option<String>,
    /// Number of consecutive buckets to forecast from `--from`.
    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct PlanArgs {
    #[arg(long)]
    pub repetitions: Option<u32>,
    #[arg(long)]
    pub horizon_hours: Option<u32>,
    #[arg(long)]
    pub test_span_days: Option<u32>,
    #[arg(long)]
    pub retrain_cadence_hours: Option<u32>,
    /// Add the MLP regressor and the two-fold HGB+MLP model.
    #[arg(long)]
    pub with_mlp: bool,
    /// Run without the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// local or global.
    #[arg(long)]
    pub scope: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Use the synthetic profile (the default when no input is given).
    #[arg(long)]
    pub synthetic: bool,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Synthetic series count.
    #[arg(long)]
    pub series: Option<usize>,
    /// Synthetic history length in years.
    #[arg(long)]
    pub years: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TecArgs {
    /// Floating point operations per prediction.
    #[arg(long, allow_negative_numbers = true)]
    pub flops: Option<f64>,
    /// Hardware efficiency; defaults to the A100 FP64 figure.
    #[arg(long, allow_negative_numbers = true)]
    pub flops_per_watt: Option<f64>,
    /// Prediction counts; repeat to compare workloads.
    #[arg(long = "n", num_args = 1..)]
    pub n: Vec<u64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let ctx = commands::Context::new(&cli, &cfg)?;
    match &cli.command {
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Predict(a) => commands::predict(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Benchmark(a) => commands::benchmark(&ctx, a),
        Command::Tec(a) => commands::tec(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("twofold: {}", e.render());
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twofold: error: {e}");
            ExitCode::FAILURE
        }
    }
}
