use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use depthscale::io::{load_depth, read_depth_png16, NYU_DIVISOR};
use depthscale::metrics::{aggregate, evaluate_with_crop, write_csv, AggregationMode};
use depthscale::{clamp_to_range, mask_from_ground_truth, Crop, DepthRange};
use serde::Serialize;

use crate::args::{parse_crop, parse_range, required, EvalArgs};
use crate::error::{CliError, CliResult};
use crate::record::{sha256_file, sha256_listing, RunRecord};

#[derive(Debug, Serialize)]
struct Effective<'a> {
    pred_dir: &'a Path,
    gt_dir: &'a Path,
    range: DepthRange,
    aggregation: AggregationMode,
    crop: Option<Crop>,
    out: Option<&'a Path>,
    divisor: f64,
}

fn is_png(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Depth files (`.png`, `.pfm`) in `dir`, keyed by file stem.
fn depth_files(dir: &Path) -> CliResult<BTreeMap<String, PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !matches!(ext.as_deref(), Some("png" | "pfm")) || !path.is_file() {
            continue;
        }
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        if let Some(prev) = out.insert(stem.clone(), path.clone()) {
            return Err(CliError::config(format!(
                "ambiguous id '{stem}': both {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(out)
}

fn dir_digest(files: &BTreeMap<String, PathBuf>) -> CliResult<String> {
    let lines = files
        .values()
        .map(|p| Ok((p.file_name().unwrap().to_string_lossy().into_owned(), sha256_file(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(sha256_listing(lines.iter().map(|(a, b)| (a.as_str(), b.as_str()))))
}

pub fn run(args: EvalArgs) -> CliResult<()> {
    let pred_dir = required(args.pred_dir, "pred-dir")?;
    let gt_dir = required(args.gt_dir, "gt-dir")?;
    let range = parse_range(args.range.as_deref().unwrap_or("nyu"))?;
    let aggregation: AggregationMode = args.agg.as_deref().unwrap_or("image-mean").parse()?;
    let crop = args.crop.as_deref().map(parse_crop).transpose()?;
    let divisor = args.divisor.unwrap_or(NYU_DIVISOR);

    let preds = depth_files(&pred_dir)?;
    let gts = depth_files(&gt_dir)?;
    let only_pred: Vec<&str> = preds
        .keys()
        .filter(|k| !gts.contains_key(*k))
        .map(String::as_str)
        .collect();
    let only_gt: Vec<&str> = gts
        .keys()
        .filter(|k| !preds.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !only_pred.is_empty() || !only_gt.is_empty() {
        return Err(CliError::config(format!(
            "prediction and ground-truth ids differ; only in {}: [{}]; only in {}: [{}]",
            pred_dir.display(),
            only_pred.join(", "),
            gt_dir.display(),
            only_gt.join(", ")
        )));
    }
    if preds.is_empty() {
        return Err(CliError::config(format!("no depth files in {}", pred_dir.display())));
    }

    let mut rows = Vec::with_capacity(preds.len());
    for (id, pred_path) in &preds {
        let gt_path = &gts[id];
        let (gt, mut mask) = if is_png(gt_path) {
            let (gt, png_valid) = read_depth_png16(gt_path, divisor)?;
            let m = mask_from_ground_truth(&gt, range).and(&png_valid)?;
            (gt, m)
        } else {
            let gt = load_depth(gt_path, divisor)?;
            let m = mask_from_ground_truth(&gt, range);
            (gt, m)
        };
        let pred = clamp_to_range(&load_depth(pred_path, divisor)?, range)?;
        if let Some(c) = &crop {
            mask = mask.restrict_to(c);
        }
        let report = evaluate_with_crop(&pred, &gt, &mask, None).map_err(|e| CliError::from(e).context(id))?;
        rows.push((id.clone(), report));
    }
    let reports: Vec<_> = rows.iter().map(|(_, r)| *r).collect();
    let total = aggregate(&reports, aggregation)?;
    let csv = write_csv(&rows, &total);

    match &args.out {
        Some(out) => {
            std::fs::write(out, &csv).map_err(|e| CliError::io(out, e))?;
            let mut record = RunRecord::new(
                "eval",
                Effective {
                    pred_dir: &pred_dir,
                    gt_dir: &gt_dir,
                    range,
                    aggregation,
                    crop,
                    out: Some(out),
                    divisor,
                },
            );
            record.input("pred_dir", &pred_dir, dir_digest(&preds)?);
            record.input("gt_dir", &gt_dir, dir_digest(&gts)?);
            record.write(&crate::train::sibling(out, "run.json"))?;
            print!("{}", total.to_key_value());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
