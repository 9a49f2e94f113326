//! Standard monocular depth error metrics and the inverse-proportional fit
//! used to relate predicted scale to scene depth.

use std::fmt::Write as _;

use crate::depth::{ensure_same_shape, Crop, DepthMap, ValidityMask};
use crate::error::{Error, Result};

pub const DELTA_THRESHOLDS: [f64; 3] = [1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    /// Every image weighted equally.
    #[default]
    ImageMean,
    /// Every valid pixel weighted equally.
    PixelMean,
}

impl AggregationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ImageMean => "image-mean",
            Self::PixelMean => "pixel-mean",
        }
    }
}

impl std::str::FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image-mean" | "image" => Ok(Self::ImageMean),
            "pixel-mean" | "pixel" => Ok(Self::PixelMean),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregation mode '{other}' (image-mean|pixel-mean)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricReport {
    pub abs_rel: f64,
    pub rmse: f64,
    pub log10: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub n_pixels: usize,
    pub n_images: usize,
    /// Set on dataset-level reports.
    pub aggregation: Option<AggregationMode>,
}

impl MetricReport {
    const FIELDS: [&'static str; 9] = [
        "abs_rel", "rmse", "log10", "rmse_log", "delta1", "delta2", "delta3", "n_pixels", "n_images",
    ];

    fn values(&self) -> [String; 9] {
        [
            self.abs_rel.to_string(),
            self.rmse.to_string(),
            self.log10.to_string(),
            self.rmse_log.to_string(),
            self.delta1.to_string(),
            self.delta2.to_string(),
            self.delta3.to_string(),
            self.n_pixels.to_string(),
            self.n_images.to_string(),
        ]
    }

    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for (k, v) in Self::FIELDS.iter().zip(self.values()) {
            let _ = writeln!(s, "{k}={v}");
        }
        if let Some(mode) = self.aggregation {
            let _ = writeln!(s, "aggregation={}", mode.as_str());
        }
        s
    }

    pub fn csv_header() -> String {
        format!("image_id,{}", Self::FIELDS.join(","))
    }

    pub fn csv_row(&self, id: &str) -> String {
        format!("{id},{}", self.values().join(","))
    }
}

/// Writes one row per image followed by an aggregate row labelled by its mode.
pub fn write_csv(rows: &[(String, MetricReport)], aggregate: &MetricReport) -> String {
    let mut s = MetricReport::csv_header();
    s.push('\n');
    for (id, r) in rows {
        s.push_str(&r.csv_row(id));
        s.push('\n');
    }
    let label = format!("ALL[{}]", aggregate.aggregation.unwrap_or_default().as_str());
    s.push_str(&aggregate.csv_row(&label));
    s.push('\n');
    s
}

pub fn evaluate(pred: &DepthMap, gt: &DepthMap, mask: &ValidityMask) -> Result<MetricReport> {
    evaluate_with_crop(pred, gt, mask, None)
}

/// Per-image metrics over the valid pixels of `mask`, optionally restricted to `crop`.
pub fn evaluate_with_crop(
    pred: &DepthMap,
    gt: &DepthMap,
    mask: &ValidityMask,
    crop: Option<&Crop>,
) -> Result<MetricReport> {
    ensure_same_shape(gt, pred, "prediction")?;
    ensure_same_shape(gt, mask, "mask")?;
    let cropped;
    let mask = match crop {
        Some(c) => {
            cropped = mask.restrict_to(c);
            &cropped
        }
        None => mask,
    };
    let n = mask.count();
    if n == 0 {
        return Err(Error::EmptyMask("evaluation needs at least one valid pixel"));
    }
    let (mut abs_rel, mut sq, mut log10, mut sq_log) = (0.0, 0.0, 0.0, 0.0);
    let mut hits = [0usize; 3];
    for (i, ((&p, &g), _)) in pred
        .values()
        .iter()
        .zip(gt.values())
        .zip(mask.bits())
        .enumerate()
        .filter(|(_, (_, &b))| b)
    {
        let (p, g) = (p as f64, g as f64);
        for (what, v) in [
            ("prediction must be > 0 on valid pixels", p),
            ("ground truth must be > 0 on valid pixels", g),
        ] {
            if v <= 0.0 {
                let (row, col) = gt.coord(i);
                return Err(Error::OutOfDomain {
                    what,
                    row,
                    col,
                    value: v,
                });
            }
        }
        let diff = g - p;
        abs_rel += diff.abs() / g;
        sq += diff * diff;
        log10 += (g.log10() - p.log10()).abs();
        let dl = g.ln() - p.ln();
        sq_log += dl * dl;
        let ratio = (p / g).max(g / p);
        for (h, thr) in hits.iter_mut().zip(DELTA_THRESHOLDS) {
            if ratio < thr {
                *h += 1;
            }
        }
    }
    let nf = n as f64;
    Ok(MetricReport {
        abs_rel: abs_rel / nf,
        rmse: (sq / nf).sqrt(),
        log10: log10 / nf,
        rmse_log: (sq_log / nf).sqrt(),
        delta1: hits[0] as f64 / nf,
        delta2: hits[1] as f64 / nf,
        delta3: hits[2] as f64 / nf,
        n_pixels: n,
        n_images: 1,
        aggregation: None,
    })
}

/// Combines per-image reports. Pixel-mean weights by `n_pixels`; the RMSE
/// fields are combined through their mean squares so that pixel-mean equals
/// evaluating all pixels at once.
pub fn aggregate(reports: &[MetricReport], mode: AggregationMode) -> Result<MetricReport> {
    if reports.is_empty() {
        return Err(Error::Empty("no reports to aggregate"));
    }
    let weights: Vec<f64> = match mode {
        AggregationMode::ImageMean => vec![1.0; reports.len()],
        AggregationMode::PixelMean => reports.iter().map(|r| r.n_pixels as f64).collect(),
    };
    let total: f64 = weights.iter().sum();
    let mean = |f: &dyn Fn(&MetricReport) -> f64| -> f64 {
        reports.iter().zip(&weights).map(|(r, w)| w * f(r)).sum::<f64>() / total
    };
    let (rmse, rmse_log) = match mode {
        AggregationMode::ImageMean => (mean(&|r| r.rmse), mean(&|r| r.rmse_log)),
        AggregationMode::PixelMean => (
            mean(&|r| r.rmse * r.rmse).sqrt(),
            mean(&|r| r.rmse_log * r.rmse_log).sqrt(),
        ),
    };
    Ok(MetricReport {
        abs_rel: mean(&|r| r.abs_rel),
        rmse,
        log10: mean(&|r| r.log10),
        rmse_log,
        delta1: mean(&|r| r.delta1),
        delta2: mean(&|r| r.delta2),
        delta3: mean(&|r| r.delta3),
        n_pixels: reports.iter().map(|r| r.n_pixels).sum(),
        n_images: reports.iter().map(|r| r.n_images).sum(),
        aggregation: Some(mode),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InverseFit {
    /// `a` in `v = a / m`.
    pub coefficient: f64,
    pub r_squared: f64,
    pub residual: f64,
}

/// Least-squares fit of `v = a / m` to `(m, v)` points.
///
/// `R^2 = 1 - SS_res / SS_tot` with `SS_tot` taken about the mean of `v`;
/// when all `v` coincide it is 1 for an exact fit and 0 otherwise.
pub fn fit_inverse_proportional(points: &[(f64, f64)]) -> Result<InverseFit> {
    if points.is_empty() {
        return Err(Error::Empty("inverse-proportional fit needs at least one point"));
    }
    if let Some(&(m, _)) = points.iter().find(|(m, _)| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidParameter(format!("median depth must be > 0, got {m}")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(m, v) in points {
        num += v / m;
        den += 1.0 / (m * m);
    }
    let a = num / den;
    let residual: f64 = points.iter().map(|&(m, v)| (a / m - v).powi(2)).sum();
    let mean_v = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|&(_, v)| (v - mean_v).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - residual / ss_tot
    } else if residual <= f64::EPSILON * (1.0 + mean_v * mean_v) {
        1.0
    } else {
        0.0
    };
    Ok(InverseFit {
        coefficient: a,
        r_squared,
        residual,
    })
}
