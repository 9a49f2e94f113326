use depthscale::synth::{generate_synthetic_dataset, CategorySpec, SynthSpec};
use serde::Serialize;

use crate::args::{parse_range, required, SynthArgs};
use crate::error::CliResult;
use crate::record::RunRecord;

#[derive(Debug, Serialize)]
struct Effective<'a> {
    out: &'a std::path::Path,
    spec: &'a SynthSpec,
}

pub fn run(args: SynthArgs) -> CliResult<()> {
    let out = required(args.out, "out")?;
    let d = SynthSpec::default();
    let n_categories = args.categories.unwrap_or(d.categories.len());
    let spec = SynthSpec {
        categories: (0..n_categories).map(CategorySpec::default_for).collect(),
        samples_per_category: args.samples.unwrap_or(d.samples_per_category),
        height: args.height.unwrap_or(d.height),
        width: args.width.unwrap_or(d.width),
        embedding_dim: args.dim.unwrap_or(d.embedding_dim),
        embedding_noise: args.noise.unwrap_or(d.embedding_noise),
        code_scale: args.code_scale.unwrap_or(d.code_scale),
        captions_per_sample: args.captions.unwrap_or(d.captions_per_sample),
        holdout_fraction: args.holdout.unwrap_or(d.holdout_fraction),
        depth_range: match &args.range {
            Some(r) => parse_range(r)?,
            None => d.depth_range,
        },
        seed: args.seed.unwrap_or(d.seed),
    };
    spec.validate()?;
    let result = generate_synthetic_dataset(&spec, &out)?;
    RunRecord::new("synth", Effective { out: &out, spec: &spec }).write(&out.join("run.json"))?;
    println!(
        "{}",
        serde_json::json!({
            "train_manifest": result.train_manifest,
            "test_manifest": result.test_manifest,
            "n_train": result.n_train,
            "n_test": result.n_test,
        })
    );
    Ok(())
}
