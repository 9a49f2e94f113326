//! Flag definitions. Every option is optional at parse time so that values
//! can be layered: command line, then `RSA_*` environment, then the config
//! file table for the subcommand, then built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use depthscale::{Crop, DepthRange};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

macro_rules! layered {
    ($(#[$sm:meta])* $name:ident { $( $(#[$m:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$sm])*
        #[derive(clap::Args, Deserialize, Debug, Default, Clone)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $( $(#[$m])* #[serde(default)] pub $field: Option<$ty>, )*
        }

        impl $name {
            /// Fields set in `self` win over those in `fallback`.
            pub fn or(self, fallback: Self) -> Self {
                Self { $( $field: self.$field.or(fallback.$field), )* }
            }
        }
    };
}

#[derive(Parser, Debug)]
#[command(
    name = "depthscale",
    version,
    about = "Relative-to-metric depth alignment: synth, train, align, eval"
)]
pub struct Cli {
    /// TOML file with optional [synth], [train], [align] and [eval] tables.
    #[arg(long, global = true, env = "RSA_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset whose categories fix the true scale and shift.
    Synth(SynthArgs),
    /// Train the caption-conditioned scale/shift head.
    Train(TrainArgs),
    /// Convert relative inverse depth to metric depth.
    Align(AlignArgs),
    /// Score predicted depth maps against ground truth.
    Eval(EvalArgs),
}

layered!(SynthArgs {
    /// Output directory.
    #[arg(long, env = "RSA_OUT")]
    out: PathBuf,
    #[arg(long, env = "RSA_CATEGORIES")]
    categories: usize,
    /// Samples per category.
    #[arg(long, env = "RSA_SAMPLES")]
    samples: usize,
    #[arg(long, env = "RSA_HEIGHT")]
    height: usize,
    #[arg(long, env = "RSA_WIDTH")]
    width: usize,
    /// Embedding dimension.
    #[arg(long, env = "RSA_DIM")]
    dim: usize,
    /// Per-component embedding noise (standard deviation).
    #[arg(long, env = "RSA_NOISE", allow_negative_numbers = true)]
    noise: f64,
    #[arg(long, env = "RSA_CODE_SCALE", allow_negative_numbers = true)]
    code_scale: f64,
    /// Caption embeddings per sample.
    #[arg(long, env = "RSA_CAPTIONS")]
    captions: usize,
    /// Fraction of each category held out for testing.
    #[arg(long, env = "RSA_HOLDOUT", allow_negative_numbers = true)]
    holdout: f64,
    /// nyu, kitti, void or MIN,MAX in meters.
    #[arg(long, env = "RSA_RANGE")]
    range: String,
    #[arg(long, env = "RSA_SEED")]
    seed: u64,
});

layered!(TrainArgs {
    #[arg(long, env = "RSA_MANIFEST")]
    manifest: PathBuf,
    /// Checkpoint path. The loss curve and run record are written next to it.
    #[arg(long, env = "RSA_OUT")]
    out: PathBuf,
    #[arg(long, env = "RSA_EPOCHS")]
    epochs: usize,
    #[arg(long, env = "RSA_SEED")]
    seed: u64,
    #[arg(long, env = "RSA_BATCH")]
    batch: usize,
    /// Embedding dimension; inferred from the data when omitted.
    #[arg(long, env = "RSA_DIM")]
    dim: usize,
    #[arg(long, env = "RSA_LR_MAX", allow_negative_numbers = true)]
    lr_max: f64,
    #[arg(long, env = "RSA_LR_MIN", allow_negative_numbers = true)]
    lr_min: f64,
    /// Continue from a checkpoint at its recorded epoch.
    #[arg(long, env = "RSA_RESUME")]
    resume: PathBuf,
    /// Divisor for 16-bit PNG depth files.
    #[arg(long, env = "RSA_DIVISOR")]
    divisor: f64,
});

layered!(AlignArgs {
    /// rsa: checkpoint + caption embeddings. median: USES GROUND TRUTH.
    /// linear-fit: USES GROUND TRUTH. global: one pair fit on the ground truth
    /// of --fit-manifest. fixed: --alpha and --beta.
    #[arg(long, env = "RSA_METHOD")]
    method: String,
    #[arg(long, env = "RSA_MANIFEST")]
    manifest: PathBuf,
    /// Output directory for depth maps, params.csv and run.json.
    #[arg(long, env = "RSA_OUT")]
    out: PathBuf,
    /// Head checkpoint (rsa).
    #[arg(long, env = "RSA_CHECKPOINT")]
    checkpoint: PathBuf,
    /// Caption aggregation for rsa: first or mean.
    #[arg(long, env = "RSA_AGG")]
    agg: String,
    /// Scale for method fixed.
    #[arg(long, env = "RSA_ALPHA", allow_negative_numbers = true)]
    alpha: f64,
    /// Shift for method fixed.
    #[arg(long, env = "RSA_BETA", allow_negative_numbers = true)]
    beta: f64,
    /// Training manifest whose ground truth the global pair is fit on.
    #[arg(long, env = "RSA_FIT_MANIFEST")]
    fit_manifest: PathBuf,
    #[arg(long, env = "RSA_GLOBAL_ITERATIONS")]
    global_iterations: usize,
    #[arg(long, env = "RSA_GLOBAL_LR", allow_negative_numbers = true)]
    global_lr: f64,
    /// Space of the linear fit: inverse or metric.
    #[arg(long, env = "RSA_SPACE")]
    space: String,
    #[arg(long, env = "RSA_EPS", allow_negative_numbers = true)]
    eps: f32,
    /// Output format: png (16-bit, --divisor) or pfm.
    #[arg(long, env = "RSA_FORMAT")]
    format: String,
    #[arg(long, env = "RSA_DIVISOR")]
    divisor: f64,
    #[arg(long, env = "RSA_SEED")]
    seed: u64,
});

layered!(EvalArgs {
    #[arg(long, env = "RSA_PRED_DIR")]
    pred_dir: PathBuf,
    #[arg(long, env = "RSA_GT_DIR")]
    gt_dir: PathBuf,
    /// nyu, kitti, void or MIN,MAX in meters.
    #[arg(long, env = "RSA_RANGE")]
    range: String,
    /// image-mean or pixel-mean.
    #[arg(long, env = "RSA_AGG")]
    agg: String,
    /// TOP,LEFT,HEIGHT,WIDTH evaluation window.
    #[arg(long, env = "RSA_CROP")]
    crop: String,
    /// Per-image CSV; printed to stdout when omitted.
    #[arg(long, env = "RSA_OUT")]
    out: PathBuf,
    #[arg(long, env = "RSA_DIVISOR")]
    divisor: f64,
});

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub synth: SynthArgs,
    #[serde(default)]
    pub train: TrainArgs,
    #[serde(default)]
    pub align: AlignArgs,
    #[serde(default)]
    pub eval: EvalArgs,
}

impl ConfigFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

pub fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::config(format!("missing required option --{flag}")))
}

pub fn parse_range(s: &str) -> CliResult<DepthRange> {
    if let Some(r) = DepthRange::preset(s) {
        return Ok(r);
    }
    let bad = || CliError::config(format!("invalid depth range '{s}' (nyu|kitti|void|MIN,MAX)"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok(DepthRange::new(lo, hi)?)
}

pub fn parse_crop(s: &str) -> CliResult<Crop> {
    let bad = || CliError::config(format!("invalid crop '{s}' (TOP,LEFT,HEIGHT,WIDTH)"));
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    match v[..] {
        [top, left, height, width] if height > 0 && width > 0 => Ok(Crop {
            top,
            left,
            height,
            width,
        }),
        _ => Err(bad()),
    }
}
