use crate::depth::{ensure_same_shape, DepthMap, ScaleShift, ValidityMask};
use crate::error::{Error, Result};

/// Masked mean absolute error, `(1/|M|) * sum_M |pred - gt|`.
pub fn masked_l1_loss(pred: &DepthMap, gt: &DepthMap, mask: &ValidityMask) -> Result<f64> {
    ensure_same_shape(pred, gt, "ground truth")?;
    ensure_same_shape(pred, mask, "mask")?;
    let n = mask.count();
    if n == 0 {
        return Err(Error::EmptyMask("masked L1 loss needs at least one valid pixel"));
    }
    let sum: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .zip(mask.bits())
        .filter(|(_, &b)| b)
        .map(|((&p, &g), _)| (p as f64 - g as f64).abs())
        .sum();
    Ok(sum / n as f64)
}

/// Loss of the aligned prediction and its partial derivatives with respect
/// to `alpha` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentLoss {
    pub loss: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
}

impl AlignmentLoss {
    /// Derivatives with respect to `ln alpha` and `ln beta`.
    pub fn log_gradient(&self, params: ScaleShift) -> (f64, f64) {
        (self.d_alpha * params.alpha, self.d_beta * params.beta)
    }
}

/// Masked L1 loss of `1/(alpha*y + beta)` against `gt`, with its gradient.
///
/// Evaluated in f64 regardless of storage precision. The L1 subgradient at a
/// zero residual is 0.
pub fn alignment_loss(
    inv_rel: &DepthMap,
    gt: &DepthMap,
    mask: &ValidityMask,
    params: ScaleShift,
) -> Result<AlignmentLoss> {
    ensure_same_shape(inv_rel, gt, "ground truth")?;
    ensure_same_shape(inv_rel, mask, "mask")?;
    let n = mask.count();
    if n == 0 {
        return Err(Error::EmptyMask("alignment loss needs at least one valid pixel"));
    }
    let inv_n = 1.0 / n as f64;
    let (mut loss, mut d_alpha, mut d_beta) = (0.0, 0.0, 0.0);
    for ((&y, &g), _) in inv_rel
        .values()
        .iter()
        .zip(gt.values())
        .zip(mask.bits())
        .filter(|(_, &b)| b)
    {
        let y = y as f64;
        let pred = params.depth_of(y);
        let r = pred - g as f64;
        loss += r.abs();
        let sign = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        // d pred / d beta = -pred^2, d pred / d alpha = -pred^2 * y
        let d_beta_px = -sign * pred * pred;
        d_beta += d_beta_px;
        d_alpha += d_beta_px * y;
    }
    Ok(AlignmentLoss {
        loss: loss * inv_n,
        d_alpha: d_alpha * inv_n,
        d_beta: d_beta * inv_n,
    })
}
