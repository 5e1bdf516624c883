//! Command-line front end: `ebim <command>`.
//!
//! Every command validates its inputs, writes its outputs and a
//! `<output>.manifest.json` run manifest beside the primary output, and exits
//! with a code naming the error class (see [`error`]).

mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use error::CliError;
pub use manifest::{FileDigest, RunManifest};

/// Seed used when neither `--seed` nor `--random-seed` is given.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "ebim", version, about = "Entropy-localized adversarial attacks and the perception study")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a CNN (the reference architecture) and save its weights.
    Train(TrainArgs),
    /// Run FGSM, BIM, EbIM or a localized attack on one image.
    Attack(AttackArgs),
    /// Compute the local-entropy strength map of an image.
    EntropyMap(EntropyMapArgs),
    /// Generate a Perlin-noise strength map, optionally at a target kappa.
    Perlin(PerlinArgs),
    /// Compare two images: norms, predictions and a contrast-maximized difference.
    Compare(CompareArgs),
    /// Run the hypothesis battery over a response log.
    Stats(StatsArgs),
    /// Serve the perception study over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeedArgs {
    /// Seed for every random choice of the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw the seed from the operating system (it is recorded in the manifest).
    #[arg(long, conflicts_with = "seed")]
    pub random_seed: bool,
}

impl SeedArgs {
    pub fn resolve(&self) -> u64 {
        match (self.seed, self.random_seed) {
            (Some(s), _) => s,
            (None, true) => rand::random(),
            (None, false) => DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Training images, one numbered subdirectory per class. Without it the
    /// procedural shapes set is generated.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Held-out images in the same layout; defaults to fresh procedural shapes.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Images per class when generating the shapes set.
    #[arg(long, default_value_t = ebim::reference::TRAIN_PER_CLASS)]
    pub per_class: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.03)]
    pub lr: f64,
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    /// Without a seed, the reference recipe's fixed seeds are used.
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Output weight file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Fgsm,
    Bim,
    Ebim,
    Localized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrayscaleArg {
    Mean,
    Luminance,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EntropyArgs {
    #[arg(long, default_value_t = ebim::maps::DEFAULT_RADIUS)]
    pub entropy_radius: usize,
    #[arg(long, default_value_t = ebim::maps::DEFAULT_BINS)]
    pub entropy_bins: usize,
    /// Binarization threshold in bits.
    #[arg(long, default_value_t = ebim::maps::DEFAULT_ENTROPY_THRESHOLD)]
    pub entropy_threshold: f64,
    /// Use `(S / S_max)^gamma` instead of binarizing.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = GrayscaleArg::Mean)]
    pub grayscale: GrayscaleArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttackArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Input image (PGM or PPM).
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Target class; omit for an untargeted attack.
    #[arg(long)]
    pub target_label: Option<usize>,
    #[arg(long, default_value_t = ebim::attack::DEFAULT_CERTAINTY)]
    pub certainty: f64,
    #[arg(long, default_value_t = ebim::attack::DEFAULT_STEPSIZE)]
    pub stepsize: f64,
    #[arg(long, default_value_t = ebim::attack::DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    #[arg(long, default_value_t = ebim::attack::DEFAULT_LINF_BUDGET)]
    pub linf_budget: f64,
    /// Single-step size for FGSM.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[command(flatten)]
    pub entropy: EntropyArgs,
    /// Strength map (EMAP1) for `--method localized`.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Adversarial image to write (PGM or PPM).
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report; defaults to `<out>.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EntropyMapArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub entropy: EntropyArgs,
    /// Strength map to write (EMAP1).
    #[arg(long)]
    pub out: PathBuf,
    /// Raw local entropy in bits (EMAP1).
    #[arg(long)]
    pub entropy_out: Option<PathBuf>,
    /// Entropy visualization, scaled so the attainable maximum is white.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    /// Strength map visualization.
    #[arg(long)]
    pub strength_pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PerlinArgs {
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    /// Lattice cell size of the first octave, in pixels.
    #[arg(long, default_value_t = 16)]
    pub cell: usize,
    #[arg(long, default_value_t = 3)]
    pub octaves: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Adjust the map's relative total strength to this value.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Reach `--kappa` by thresholding to a binary map instead of by brightness.
    #[arg(long, requires = "kappa")]
    pub binary: bool,
    #[arg(long, default_value_t = ebim::maps::DEFAULT_KAPPA_TOLERANCE)]
    pub kappa_tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub modified: PathBuf,
    /// Model for the before/after predictions.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub out: PathBuf,
    /// Contrast-maximized difference image.
    #[arg(long)]
    pub diff: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    /// Response log (JSONL).
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long, default_value_t = ebim::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// JSON report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeArgs {
    /// Study configuration (JSON).
    #[arg(long)]
    pub study: PathBuf,
    /// Response log (JSONL), created if missing and appended to otherwise.
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Attack(a) => commands::attack(&a),
        Command::EntropyMap(a) => commands::entropy_map(&a),
        Command::Perlin(a) => commands::perlin(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Serve(a) => commands::serve(&a),
    }
}
