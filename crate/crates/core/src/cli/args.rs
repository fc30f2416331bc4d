use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Car-occupancy detection with UWB radar: simulate or import data, train
/// residual networks, evaluate AUC over SNR and complexity.
#[derive(Debug, Parser)]
#[command(name = "uwbocc", version, about, long_about = None)]
pub struct Cli {
    /// TOML file with option values; a `[<subcommand>]` table holds that
    /// command's options, top-level keys apply to every command that has
    /// them. Command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 uses every available core. Results do not depend
    /// on this value.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Simulate(SimulateArgs),
    /// Segment a recorded CIR stream and append it to a dataset.
    Import(ImportArgs),
    /// Train a network on a dataset.
    Train(TrainArgs),
    /// Sweep detectors over the SNR grid on the test partition.
    Evaluate(EvaluateArgs),
    /// Evaluate one checkpoint per architecture variant at fixed SNRs.
    Ablate(AblateArgs),
    /// Summarize reports next to the architecture table and published values.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Output dataset directory (the manifest is written to
    /// `<out>/manifest.json`).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub breathing: usize,
    #[arg(long, default_value_t = 10)]
    pub talking: usize,
    #[arg(long, default_value_t = 10)]
    pub moving: usize,
    #[arg(long, default_value_t = 10)]
    pub empty: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scene file: radar settings plus a template scene reused for every
    /// sample.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Fast-time samples per frame (overrides the scene file).
    #[arg(long)]
    pub n_fast: Option<usize>,
    /// Frames per sample (overrides the scene file).
    #[arg(long)]
    pub m_slow: Option<usize>,
    /// Receiver noise standard deviation per real/imaginary component.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Share of each occupied class assigned to the evaluation car; the rest
    /// belongs to the training car.
    #[arg(long, default_value_t = 0.5)]
    pub eval_fraction: f64,
    #[arg(long, default_value = "1")]
    pub train_car: String,
    #[arg(long, default_value = "2")]
    pub eval_car: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DatasetArg {
    /// Dataset directory or manifest file; falls back to UWBOCC_DATA_DIR.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ImportArgs {
    #[command(flatten)]
    pub dataset: DatasetArg,
    /// Continuous `.cir` recording to segment.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub car: String,
    #[arg(long)]
    pub participant: Option<String>,
    #[arg(long)]
    pub seat: Option<String>,
    /// Recording identifier; defaults to the input file stem.
    #[arg(long)]
    pub recording: Option<String>,
    /// Fast-time sampling interval in seconds.
    #[arg(long, default_value_t = 0.5e-9)]
    pub t_ft: f64,
    /// Frame repetition interval in seconds.
    #[arg(long, default_value_t = 0.1)]
    pub t_st: f64,
    /// Segment length in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub window_s: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long, default_value = "1")]
    pub train_car: String,
    #[arg(long, default_value = "2")]
    pub eval_car: String,
    /// Evaluation-car test samples per occupied class.
    #[arg(long, default_value_t = 150)]
    pub test_per_class: usize,
    /// Training-car breathing samples held out for validation.
    #[arg(long, default_value_t = 144)]
    pub val_breathing: usize,
    #[arg(long, default_value_t = 145)]
    pub val_talking: usize,
    #[arg(long, default_value_t = 161)]
    pub val_moving: usize,
    /// Empty samples for validation.
    #[arg(long, default_value_t = 100)]
    pub empty_val: usize,
    /// Empty samples for test.
    #[arg(long, default_value_t = 20)]
    pub empty_test: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub dataset: DatasetArg,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Architecture variant, 1D-A .. 1D-E or 2D-A .. 2D-E.
    #[arg(long, default_value = "1D-E")]
    pub variant: String,
    /// Seed for initialization, augmentation and batch order (required).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for checkpoint, history and resolved config.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Non-improving epochs before early stopping.
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    /// Draws per occupied training sample per epoch.
    #[arg(long, default_value_t = 200)]
    pub reuse_occupied: usize,
    /// Draws per empty training sample per epoch.
    #[arg(long, default_value_t = 3000)]
    pub reuse_empty: usize,
    /// Lower bound of the uniform training SNR in dB.
    #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
    pub snr_min: f64,
    /// Upper bound of the uniform training SNR in dB.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub snr_max: f64,
    /// Rescale each noise draw to the exact target SNR.
    #[arg(long)]
    pub exact_scaling: bool,
    /// Continue the run stored in `--out`.
    #[arg(long)]
    #[serde(skip)]
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Resnet,
    Energy,
    Fft,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Seed of the test-time noise (required).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pure-noise negatives added at every SNR point.
    #[arg(long, default_value_t = 0)]
    pub noise_negatives: usize,
    #[arg(long)]
    pub exact_scaling: bool,
    /// Window of the energy detector in frames.
    #[arg(long, default_value_t = 20)]
    pub energy_window: usize,
    /// Occupied classes to evaluate.
    #[arg(long = "activity", default_values_t = ["breathing".to_string(), "talking".to_string(), "moving".to_string()])]
    pub activities: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub dataset: DatasetArg,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Trained network; repeat for several.
    #[arg(long = "checkpoint")]
    #[serde(skip)]
    pub checkpoints: Vec<PathBuf>,
    /// Detectors to evaluate; `resnet` uses every `--checkpoint`.
    #[arg(long = "detector", value_enum, default_values_t = [DetectorKind::Resnet])]
    pub detectors: Vec<DetectorKind>,
    /// First grid SNR in dB.
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub snr_start: f64,
    /// Last grid SNR in dB.
    #[arg(long, default_value_t = -40.0, allow_negative_numbers = true)]
    pub snr_stop: f64,
    /// Grid spacing in dB.
    #[arg(long, default_value_t = 1.0)]
    pub snr_step: f64,
    /// Output directory for sweep.csv, sweep.json and sweep_plot.json.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub dataset: DatasetArg,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Directory holding `<VARIANT>/checkpoint.uwbk` per variant.
    #[arg(long)]
    #[serde(skip)]
    pub checkpoint_dir: PathBuf,
    /// Variants to include; defaults to all ten.
    #[arg(long = "variant")]
    pub variants: Vec<String>,
    /// Baseline detectors to add as extra points.
    #[arg(long = "detector", value_enum)]
    pub detectors: Vec<DetectorKind>,
    /// Output directory for ablation.csv, ablation.json and ablation_plot.json.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Sweep or ablation reports (.csv or .json); repeat for several.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    /// Fast-time samples assumed for the architecture table.
    #[arg(long, default_value_t = 64)]
    pub n_fast: usize,
    /// Frames per sample assumed for the architecture table.
    #[arg(long, default_value_t = 100)]
    pub m_slow: usize,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
