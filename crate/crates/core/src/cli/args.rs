use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::stats::GridFormat;

#[derive(Parser, Debug)]
#[command(
    name = "hdrclass",
    version,
    about = "Classify network traffic from 12-byte IPv4 headers with an external-attention model",
    after_help = "Set HDRCLASS_THREADS to cap worker threads."
)]
pub struct Cli {
    /// key=value file whose entries fill in any long flag not given on the
    /// command line
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Extract labeled header samples from pcap files
    Ingest(IngestArgs),
    /// Generate a synthetic labeled dataset
    Synth(SynthArgs),
    /// Per-class, per-byte histograms of normalized header values
    Stats(StatsArgs),
    /// Train a model on a dataset
    Train(TrainArgs),
    /// Grid over memory rows S and embedding width D
    Sweep(SweepArgs),
    /// Stratified k-fold cross-validation
    Crossval(CrossvalArgs),
    /// Score a trained model on a dataset
    Eval(EvalArgs),
    /// Predict classes for CSV samples or pcap packets
    Infer(InferArgs),
    /// Time single-packet inference and preprocessing
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest and compare outputs
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Synth(_) => "synth",
            Command::Stats(_) => "stats",
            Command::Train(_) => "train",
            Command::Sweep(_) => "sweep",
            Command::Crossval(_) => "crossval",
            Command::Eval(_) => "eval",
            Command::Infer(_) => "infer",
            Command::Bench(_) => "bench",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    /// Capture file and its class name as PATH:LABEL (repeatable)
    #[arg(long = "pcap", value_name = "PATH:LABEL", required = true)]
    pub pcaps: Vec<String>,
    /// Sample length in bytes: 12, or 20 to 1500
    #[arg(long, default_value_t = 12)]
    pub input_len: usize,
    /// Output dataset CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Drop repeated (bytes, label) samples
    #[arg(long)]
    pub dedup: bool,
    /// Write the ingest summary as JSON here
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 6)]
    pub classes: usize,
    #[arg(long, default_value_t = 5000)]
    pub per_class: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub input_len: usize,
    /// Generate the two-class set with disjoint Total Length ranges
    #[arg(long)]
    pub separable: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_grid_format)]
    #[serde(serialize_with = "ser_grid_format")]
    pub format: GridFormat,
}

fn parse_grid_format(s: &str) -> Result<GridFormat, String> {
    s.parse()
}

fn ser_grid_format<S: serde::Serializer>(f: &GridFormat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match f {
        GridFormat::Csv => "csv",
        GridFormat::Json => "json",
    })
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DropoutPlacement {
    Both,
    Embedding,
    Attention,
    None,
}

/// Architecture flags shared by every training command.
#[derive(Args, Debug, Serialize)]
pub struct ArchFlags {
    /// Number of convolution kernels L
    #[arg(long, default_value_t = 64)]
    pub kernels: usize,
    /// Kernel width Q
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
    /// Where dropout is applied
    #[arg(long, value_enum, default_value_t = DropoutPlacement::Both)]
    pub dropout_at: DropoutPlacement,
}

#[derive(Args, Debug, Serialize)]
pub struct OptimFlags {
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub adam_eps: f64,
    /// Seed for initialization, fold assignment, batch order and dropout
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Stop after this many epochs without held-out loss improvement
    #[arg(long)]
    pub patience: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// External memory rows S
    #[arg(long, default_value_t = 128)]
    pub s: usize,
    /// Embedding width D
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[command(flatten)]
    pub arch: ArchFlags,
    #[command(flatten)]
    pub optim: OptimFlags,
    /// Fraction of each class held out and scored after every epoch
    #[arg(long, default_value_t = 0.0)]
    pub holdout: f64,
    /// Model file to write
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch CSV log
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 128)]
    pub s: usize,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[command(flatten)]
    pub arch: ArchFlags,
    #[command(flatten)]
    pub optim: OptimFlags,
    /// JSON report with per-fold results and the summary
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Memory-row values, comma separated
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub s: Vec<usize>,
    /// Embedding widths, comma separated
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub d: Vec<usize>,
    /// Folds in the stratified plan; the first fold is held out
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[command(flatten)]
    pub arch: ArchFlags,
    #[command(flatten)]
    pub optim: OptimFlags,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Confusion matrix as CSV
    #[arg(long)]
    pub confusion: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct InferArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset CSV to classify
    #[arg(long, conflicts_with = "pcap", required_unless_present = "pcap")]
    pub csv: Option<PathBuf>,
    /// Capture files to classify packet by packet
    #[arg(long)]
    pub pcap: Vec<PathBuf>,
    /// Lines of INDEX=NAME (or INDEX,NAME) renaming the model's classes
    #[arg(long)]
    pub label_map: Option<PathBuf>,
    /// Prediction CSV; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 10000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    /// Draw inputs from this dataset instead of random bytes
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Also time pcap record to sample extraction on this capture
    #[arg(long)]
    pub pcap: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Re-run without comparing output digests
    #[arg(long)]
    pub no_verify: bool,
}
