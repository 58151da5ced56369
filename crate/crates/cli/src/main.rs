//! `egospeed`: ego-vehicle speed estimation from dense optical flow and
//! monocular disparity maps.

mod commands;
mod error;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser)]
#[command(
    name = "egospeed",
    version,
    about = "Ego-vehicle speed estimation from dense optical flow and monocular disparity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-recording speed traces (raw, smoothed, scaled) as CSV
    Estimate(EstimateArgs),
    /// Evaluate a grid of estimator configurations and report RMSE per row
    Evaluate(EvaluateArgs),
    /// Score flow or depth predictions against ground-truth maps
    Metrics(MetricsArgs),
    /// Generate a synthetic dataset with exact ground truth
    Synth(SynthArgs),
    /// Plot trace CSVs as an SVG line chart
    Chart(ChartArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Flow magnitude over disparity
    Base,
    /// Flow magnitude alone
    OfOnly,
    /// Absolute horizontal flow over disparity
    Horiz,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitArg {
    /// Least squares on differences (closed form)
    Lsq,
    /// Median of ground-truth/prediction ratios
    Median,
}

#[derive(Args, Clone)]
struct EstimatorArgs {
    /// Analysis crop: full, cropB, cropG, cropR, or X:Y:W:H
    #[arg(long, default_value = "full")]
    crop: String,
    /// Flow aggregation mode
    #[arg(long, value_enum, default_value_t = ModeArg::Base)]
    mode: ModeArg,
    /// Temporal smoothing window (odd, >= 1)
    #[arg(long, default_value_t = 25)]
    window: usize,
    /// Box-filter each pixel's time series before aggregation
    #[arg(long)]
    pixel_smooth: bool,
    /// With --pixel-smooth, skip the series-level smoothing pass
    #[arg(long)]
    no_resmooth: bool,
    /// Turning compensation (requires the full frame)
    #[arg(long)]
    tc: bool,
    /// Flow magnitude validity threshold
    #[arg(long, default_value_t = 0.2)]
    of_min: f64,
    /// Disparity validity threshold
    #[arg(long, default_value_t = 0.01)]
    disp_min: f64,
}

#[derive(Args)]
struct EstimateArgs {
    /// Dataset manifest path
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Scale-fit method for the scaled column
    #[arg(long, value_enum, default_value_t = FitArg::Lsq)]
    fit: FitArg,
    /// Use this scale factor instead of fitting one
    #[arg(long)]
    scale: Option<f64>,
    /// Output directory for per-recording CSV traces
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset manifest path
    #[arg(long)]
    manifest: PathBuf,
    /// Estimator variants to evaluate (base, e1, e2, e3, tc)
    #[arg(long, value_delimiter = ',', default_value = "base")]
    variants: Vec<String>,
    /// Crops to evaluate each variant on
    #[arg(long, value_delimiter = ',', default_value = "full")]
    crops: Vec<String>,
    /// Temporal smoothing window (odd, >= 1)
    #[arg(long, default_value_t = 25)]
    window: usize,
    /// Scale-fit method
    #[arg(long, value_enum, default_value_t = FitArg::Lsq)]
    fit: FitArg,
    /// Fit the scale only on these recording ids (comma separated)
    #[arg(long, value_delimiter = ',')]
    fit_ids: Option<Vec<String>>,
    /// Output directory for evaluation.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricKind {
    Flow,
    Depth,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggArg {
    /// Mean of per-image metrics
    Mean,
    /// Pool all pixels before computing metrics
    Pooled,
}

#[derive(Args)]
struct MetricsArgs {
    /// Directory of predicted maps
    #[arg(long)]
    pred: PathBuf,
    /// Directory of ground-truth maps
    #[arg(long)]
    gt: PathBuf,
    /// What the maps contain
    #[arg(long, value_enum)]
    kind: MetricKind,
    /// Aggregate row semantics
    #[arg(long, value_enum, default_value_t = AggArg::Mean)]
    agg: AggArg,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario: cruise, ramp, turn, or suite
    #[arg(long)]
    scenario: String,
    /// Frames per recording
    #[arg(long, default_value_t = 90)]
    frames: usize,
    /// RNG seed for the scene textures
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Camera resolution as a fraction of the 1242x375 default
    #[arg(long, default_value_t = 0.25)]
    cam_scale: f64,
    /// Output directory for the dataset and its manifest
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChartArgs {
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
    /// Trace CSVs produced by the estimate command
    #[arg(required = true)]
    traces: Vec<PathBuf>,
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("EGOSPEED_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // a failure here means the pool already exists; fine
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid EGOSPEED_THREADS={raw:?}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => commands::estimate::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Metrics(args) => commands::metrics::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Chart(args) => commands::chart::run(args),
    }
}

fn main() {
    let cli = Cli::parse();
    init_thread_pool();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Data(msg)) => {
            eprintln!("data error: {msg}");
            std::process::exit(3);
        }
    }
}
