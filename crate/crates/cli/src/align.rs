use std::fmt::Write as _;
use std::path::Path;

use depthscale::baselines::{
    apply_linear_fit, global_fit, linear_fit, median_scale, AlignmentSample, FitSpace, GlobalFitConfig,
};
use depthscale::head::{predict, Aggregation};
use depthscale::io::{
    load_checkpoint, load_depth, write_depth_png16, write_pfm, DatasetManifest, StoreCache, NYU_DIVISOR,
};
use depthscale::{apply_alignment, mask_from_ground_truth, DepthMap, ScaleShift, ValidityMask};
use serde::Serialize;

use crate::args::{required, AlignArgs};
use crate::error::{CliError, CliResult};
use crate::record::{sha256_file, sha256_manifest_tree, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Rsa,
    Median,
    LinearFit,
    Global,
    Fixed,
}

impl Method {
    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "rsa" => Ok(Self::Rsa),
            "median" => Ok(Self::Median),
            "linear-fit" => Ok(Self::LinearFit),
            "global" => Ok(Self::Global),
            "fixed" => Ok(Self::Fixed),
            other => Err(CliError::config(format!(
                "unknown method '{other}' (rsa|median|linear-fit|global|fixed)"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Rsa => "rsa",
            Self::Median => "median",
            Self::LinearFit => "linear-fit",
            Self::Global => "global",
            Self::Fixed => "fixed",
        }
    }

    fn uses_ground_truth(self) -> bool {
        matches!(self, Self::Median | Self::LinearFit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Png,
    Pfm,
}

#[derive(Debug, Serialize)]
struct Effective<'a> {
    method: Method,
    manifest: &'a Path,
    out: &'a Path,
    checkpoint: Option<&'a Path>,
    aggregation: Aggregation,
    fixed: Option<ScaleShift>,
    fit_manifest: Option<&'a Path>,
    global: Option<&'a GlobalFitConfig>,
    space: FitSpace,
    eps: f32,
    format: Format,
    divisor: f64,
}

/// One row of `params.csv`. Unused columns stay empty.
#[derive(Default)]
struct ParamRow {
    alpha: Option<f64>,
    beta: Option<f64>,
    scale: Option<f64>,
    shift: Option<f64>,
    clamped: Option<usize>,
}

fn cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn load_gt(
    manifest: &DatasetManifest,
    id: &str,
    gt: &Path,
    divisor: f64,
    method: Method,
) -> CliResult<(DepthMap, ValidityMask)> {
    let gt = load_depth(&manifest.resolve(gt), divisor).map_err(|e| {
        CliError::from(e).context(format_args!(
            "method '{}' uses ground truth; cannot load it for '{id}'",
            method.name()
        ))
    })?;
    let mask = mask_from_ground_truth(&gt, manifest.depth_range);
    Ok((gt, mask))
}

fn fit_global(path: &Path, cfg: &GlobalFitConfig, divisor: f64) -> CliResult<ScaleShift> {
    let manifest = DatasetManifest::read(path)?;
    let mut data = Vec::with_capacity(manifest.records.len());
    for r in &manifest.records {
        let y = load_depth(&manifest.resolve(&r.rel_depth), divisor)?;
        let (gt, mask) = load_gt(&manifest, &r.image_id, &r.gt_depth, divisor, Method::Global)?;
        y.same_shape(&gt, "ground truth")?;
        data.push((y, gt, mask));
    }
    let samples: Vec<_> = data
        .iter()
        .map(|(y, gt, mask)| AlignmentSample { inv_rel: y, gt, mask })
        .collect();
    Ok(global_fit(&samples, cfg)?.params)
}

pub fn run(args: AlignArgs) -> CliResult<()> {
    let method = Method::parse(&required(args.method, "method")?)?;
    let manifest_path = required(args.manifest, "manifest")?;
    let out = required(args.out, "out")?;
    let eps = args.eps.unwrap_or(1e-6);
    let divisor = args.divisor.unwrap_or(NYU_DIVISOR);
    let format = match args.format.as_deref().unwrap_or("png") {
        "png" => Format::Png,
        "pfm" => Format::Pfm,
        other => return Err(CliError::config(format!("unknown format '{other}' (png|pfm)"))),
    };
    let space = match args.space.as_deref().unwrap_or("inverse") {
        "inverse" => FitSpace::Inverse,
        "metric" => FitSpace::Metric,
        other => {
            return Err(CliError::config(format!(
                "unknown fit space '{other}' (inverse|metric)"
            )))
        }
    };
    let aggregation: Aggregation = args.agg.as_deref().unwrap_or("first").parse()?;
    let need = |v: bool, what: &str| -> CliResult<()> {
        if v {
            Ok(())
        } else {
            Err(CliError::config(format!("method '{}' requires {what}", method.name())))
        }
    };
    let fixed = match method {
        Method::Fixed => {
            need(args.alpha.is_some() && args.beta.is_some(), "--alpha and --beta")?;
            Some(ScaleShift::new(args.alpha.unwrap(), args.beta.unwrap())?)
        }
        _ => None,
    };
    let checkpoint = match method {
        Method::Rsa => {
            need(args.checkpoint.is_some(), "--checkpoint")?;
            let p = args.checkpoint.as_deref().unwrap();
            Some((p, load_checkpoint(p)?))
        }
        _ => None,
    };
    let global_cfg = GlobalFitConfig {
        iterations: args.global_iterations.unwrap_or(GlobalFitConfig::default().iterations),
        lr: args.global_lr.unwrap_or(GlobalFitConfig::default().lr),
        seed: args.seed.unwrap_or(0),
        ..GlobalFitConfig::default()
    };
    if method == Method::Global {
        need(
            args.fit_manifest.is_some(),
            "--fit-manifest (training data with ground truth)",
        )?;
    }

    let manifest = DatasetManifest::read(&manifest_path)?;
    let mut record = RunRecord::new(
        "align",
        Effective {
            method,
            manifest: &manifest_path,
            out: &out,
            checkpoint: checkpoint.as_ref().map(|(p, _)| *p),
            aggregation,
            fixed,
            fit_manifest: args.fit_manifest.as_deref().filter(|_| method == Method::Global),
            global: (method == Method::Global).then_some(&global_cfg),
            space,
            eps,
            format,
            divisor,
        },
    );
    record.input(
        "manifest",
        &manifest_path,
        sha256_manifest_tree(&manifest_path, &manifest)?,
    );
    if let Some((p, _)) = &checkpoint {
        record.input("checkpoint", p, sha256_file(p)?);
    }
    let global = match (method, &args.fit_manifest) {
        (Method::Global, Some(p)) => {
            let m = DatasetManifest::read(p)?;
            record.input("fit_manifest", p, sha256_manifest_tree(p, &m)?);
            Some(fit_global(p, &global_cfg, divisor)?)
        }
        _ => None,
    };

    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let mut stores = StoreCache::default();
    let mut log = String::from("image_id,alpha,beta,scale,shift,clamped\n");
    for r in &manifest.records {
        let id = r.image_id.as_str();
        let y = load_depth(&manifest.resolve(&r.rel_depth), divisor).map_err(|e| CliError::from(e).context(id))?;
        let (depth, row) = match method {
            Method::Fixed | Method::Global => {
                let p = fixed.or(global).unwrap();
                let d = apply_alignment(&y, p)?;
                (
                    d,
                    ParamRow {
                        alpha: Some(p.alpha),
                        beta: Some(p.beta),
                        ..Default::default()
                    },
                )
            }
            Method::Rsa => {
                let (_, ck) = checkpoint.as_ref().unwrap();
                let embeddings = r
                    .embeddings
                    .iter()
                    .map(|e| stores.embedding(&manifest.resolve(&e.path), e.index))
                    .collect::<depthscale::Result<Vec<_>>>()
                    .map_err(|e| CliError::from(e).context(id))?;
                let p = predict(&embeddings, &ck.params, &ck.config, aggregation)
                    .map_err(|e| CliError::from(e).context(id))?;
                let d = apply_alignment(&y, p)?;
                (
                    d,
                    ParamRow {
                        alpha: Some(p.alpha),
                        beta: Some(p.beta),
                        ..Default::default()
                    },
                )
            }
            Method::Median => {
                let (gt, mask) = load_gt(&manifest, id, &r.gt_depth, divisor, method)?;
                let m = median_scale(&y, &gt, &mask, eps).map_err(|e| CliError::from(e).context(id))?;
                (
                    m.depth,
                    ParamRow {
                        scale: Some(m.scale),
                        ..Default::default()
                    },
                )
            }
            Method::LinearFit => {
                let (gt, mask) = load_gt(&manifest, id, &r.gt_depth, divisor, method)?;
                let fit = linear_fit(id, &y, &gt, &mask, eps, space)?;
                let (d, clamped) = apply_linear_fit(&y, &fit, eps)?;
                let row = ParamRow {
                    scale: Some(fit.params.scale),
                    shift: Some(fit.params.shift),
                    clamped: Some(clamped),
                    ..Default::default()
                };
                (d, row)
            }
        };
        match format {
            Format::Png => write_depth_png16(out.join(format!("{id}.png")), &depth, None, divisor)?,
            Format::Pfm => write_pfm(out.join(format!("{id}.pfm")), &depth)?,
        }
        writeln!(
            log,
            "{id},{},{},{},{},{}",
            cell(row.alpha),
            cell(row.beta),
            cell(row.scale),
            cell(row.shift),
            cell(row.clamped)
        )
        .unwrap();
    }
    let log_path = out.join("params.csv");
    std::fs::write(&log_path, log).map_err(|e| CliError::io(&log_path, e))?;
    record.write(&out.join("run.json"))?;
    if method.uses_ground_truth() {
        eprintln!(
            "note: method '{}' uses ground truth; results are an oracle upper bound",
            method.name()
        );
    }
    Ok(())
}
