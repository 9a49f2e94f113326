use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use depthscale::head::{initial_parameters, train, MlpConfig, TrainConfig};
use depthscale::io::{load_checkpoint, load_training_set, save_checkpoint, Checkpoint, DatasetManifest, NYU_DIVISOR};
use serde::Serialize;

use crate::args::{required, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::record::{sha256_file, sha256_manifest_tree, RunRecord};

#[derive(Debug, Serialize)]
struct Effective<'a> {
    manifest: &'a Path,
    out: &'a Path,
    loss_csv: &'a Path,
    resume: Option<&'a Path>,
    start_epoch: usize,
    divisor: f64,
    mlp: &'a MlpConfig,
    train: &'a TrainConfig,
}

/// `head.rsac` -> `head.loss.csv`, `head.run.json`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn run(args: TrainArgs) -> CliResult<()> {
    let manifest_path = required(args.manifest, "manifest")?;
    let out = required(args.out, "out")?;
    let divisor = args.divisor.unwrap_or(NYU_DIVISOR);
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: args.epochs.unwrap_or(d.epochs),
        seed: args.seed.unwrap_or(d.seed),
        batch_size: args.batch.unwrap_or(d.batch_size),
        lr_max: args.lr_max.unwrap_or(d.lr_max),
        lr_min: args.lr_min.unwrap_or(d.lr_min),
        ..d
    };
    cfg.validate()?;

    if !manifest_path.is_file() {
        return Err(CliError::config(format!(
            "manifest not found: {}",
            manifest_path.display()
        )));
    }
    let manifest = DatasetManifest::read(&manifest_path)?;
    let samples = load_training_set(&manifest, divisor)?;
    let data_dim = samples.first().and_then(|s| s.embeddings.first()).map(|e| e.dim());
    for s in &samples {
        if let Some(e) = s.embeddings.iter().find(|e| Some(e.dim()) != data_dim) {
            return Err(CliError::config(format!(
                "sample '{}': embedding dim {} differs from {}",
                s.image_id,
                e.dim(),
                data_dim.unwrap_or(0)
            )));
        }
    }
    let input_dim = match (args.dim, data_dim) {
        (Some(flag), Some(data)) if flag != data => {
            return Err(CliError::config(format!("--dim {flag} but embeddings have dim {data}")));
        }
        (Some(flag), _) => flag,
        (None, Some(data)) => data,
        (None, None) => MlpConfig::default().input_dim,
    };

    let (mlp, init, start_epoch) = match &args.resume {
        Some(p) => {
            let ck = load_checkpoint(p)?;
            if ck.config.input_dim != input_dim {
                return Err(CliError::config(format!(
                    "checkpoint expects dim {}, data has {input_dim}",
                    ck.config.input_dim
                )));
            }
            (ck.config, Some(ck.params), ck.epochs_completed as usize)
        }
        None => {
            let mlp = MlpConfig {
                input_dim,
                ..MlpConfig::default()
            };
            let init = initial_parameters(&mlp, cfg.seed);
            (mlp, Some(init), 0)
        }
    };

    let loss_csv = sibling(&out, "loss.csv");
    let mut record = RunRecord::new(
        "train",
        Effective {
            manifest: &manifest_path,
            out: &out,
            loss_csv: &loss_csv,
            resume: args.resume.as_deref(),
            start_epoch,
            divisor,
            mlp: &mlp,
            train: &cfg,
        },
    );
    record.input(
        "manifest",
        &manifest_path,
        sha256_manifest_tree(&manifest_path, &manifest)?,
    );
    if let Some(p) = &args.resume {
        record.input("resume", p, sha256_file(p)?);
    }

    let outcome = train(&samples, &mlp, &cfg, init, start_epoch, |r| {
        println!("{}", serde_json::to_string(r).expect("epoch record serializes"));
    })?;

    let epochs_completed = cfg.epochs.max(start_epoch) as u32;
    save_checkpoint(
        &out,
        &Checkpoint {
            config: mlp.clone(),
            params: outcome.params,
            seed: cfg.seed,
            epochs_completed,
        },
    )?;
    let mut csv = String::from("epoch,lr,mean_loss\n");
    for r in &outcome.history {
        writeln!(csv, "{},{},{}", r.epoch, r.lr, r.mean_loss).unwrap();
    }
    std::fs::write(&loss_csv, csv).map_err(|e| CliError::io(&loss_csv, e))?;
    record.write(&sibling(&out, "run.json"))
}
