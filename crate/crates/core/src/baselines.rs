//! Scaling strategies that do not use language: median scaling and the
//! per-image least-squares fit (both read ground truth at test time), and a
//! single dataset-wide `(alpha, beta)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::depth::{ensure_same_shape, invert, DepthMap, ScaleShift, ValidityMask};
use crate::error::{Error, Result};
use crate::head::loss::alignment_loss;
use crate::head::optim::{adam_update, cosine_lr, AdamConfig};

/// Lower median (element at rank `(n-1)/2`). `None` on empty input.
pub fn lower_median(values: &[f32]) -> Option<f32> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    let k = (v.len() - 1) / 2;
    let (_, m, _) = v.select_nth_unstable_by(k, f32::total_cmp);
    Some(*m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianScaled {
    /// `median(gt) / median(pred_depth)` over the mask.
    pub scale: f64,
    pub depth: DepthMap,
}

/// Converts inverse relative depth to depth and rescales it so that its
/// masked median matches the masked ground-truth median.
pub fn median_scale(pred_inv: &DepthMap, gt: &DepthMap, mask: &ValidityMask, eps: f32) -> Result<MedianScaled> {
    ensure_same_shape(pred_inv, gt, "ground truth")?;
    ensure_same_shape(pred_inv, mask, "mask")?;
    if mask.count() == 0 {
        return Err(Error::EmptyMask("median scaling needs at least one valid pixel"));
    }
    let depth = invert(pred_inv, eps)?;
    let med_pred = lower_median(&depth.masked_values(mask)?).unwrap() as f64;
    let med_gt = lower_median(&gt.masked_values(mask)?).unwrap() as f64;
    if !(med_pred > 0.0 && med_pred.is_finite()) {
        return Err(Error::DegenerateScale(format!("median predicted depth is {med_pred}")));
    }
    // gt_med * (d / d_med) keeps the median pixel exactly at gt_med.
    let out = depth.map(|d| (med_gt * (d as f64 / med_pred)) as f32)?;
    Ok(MedianScaled {
        scale: med_gt / med_pred,
        depth: out,
    })
}

/// Which space the per-image least-squares fit operates in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSpace {
    /// `s * pred_inv + t ~ 1/gt`
    #[default]
    Inverse,
    /// `s * (1/pred_inv) + t ~ gt`
    Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearParams {
    pub scale: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitResult {
    pub params: LinearParams,
    /// Sum of squared errors over the mask at the returned parameters.
    pub residual: f64,
    pub n_valid: usize,
    pub space: FitSpace,
}

/// Least squares `min_{s,t} sum_M (s*x + t - g)^2` through the 2x2 normal equations.
pub fn least_squares_line(id: &str, x: &[f64], g: &[f64]) -> Result<(LinearParams, f64)> {
    let n = x.len() as f64;
    let (mut sx, mut sxx, mut sg, mut sxg) = (0.0, 0.0, 0.0, 0.0);
    for (&xi, &gi) in x.iter().zip(g) {
        sx += xi;
        sxx += xi * xi;
        sg += gi;
        sxg += xi * gi;
    }
    let det = n * sxx - sx * sx;
    let scale_ref = (n * sxx).max(f64::MIN_POSITIVE);
    if x.len() < 2 || det.abs() < 1e-12 * scale_ref {
        return Err(Error::SingularFit {
            image_id: id.to_string(),
            det,
        });
    }
    let scale = (n * sxg - sx * sg) / det;
    let shift = (sxx * sg - sx * sxg) / det;
    let residual = x
        .iter()
        .zip(g)
        .map(|(&xi, &gi)| (scale * xi + shift - gi).powi(2))
        .sum();
    Ok((LinearParams { scale, shift }, residual))
}

fn masked_f64(map: &DepthMap, mask: &ValidityMask) -> Vec<f64> {
    map.values()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &b)| b)
        .map(|(&v, _)| v as f64)
        .collect()
}

/// Per-image linear fit. `id` names the image in error messages.
pub fn linear_fit(
    id: &str,
    pred_inv: &DepthMap,
    gt: &DepthMap,
    mask: &ValidityMask,
    eps: f32,
    space: FitSpace,
) -> Result<FitResult> {
    ensure_same_shape(pred_inv, gt, "ground truth")?;
    ensure_same_shape(pred_inv, mask, "mask")?;
    let n_valid = mask.count();
    if n_valid < 2 {
        return Err(Error::SingularFit {
            image_id: id.to_string(),
            det: 0.0,
        });
    }
    let (x, g) = match space {
        FitSpace::Inverse => (masked_f64(pred_inv, mask), masked_f64(&invert(gt, eps)?, mask)),
        FitSpace::Metric => (masked_f64(&invert(pred_inv, eps)?, mask), masked_f64(gt, mask)),
    };
    let (params, residual) = least_squares_line(id, &x, &g)?;
    Ok(FitResult {
        params,
        residual,
        n_valid,
        space,
    })
}

/// Inverse-depth fit, the default baseline.
pub fn linear_fit_inverse(
    id: &str,
    pred_inv: &DepthMap,
    gt: &DepthMap,
    mask: &ValidityMask,
    eps: f32,
) -> Result<FitResult> {
    linear_fit(id, pred_inv, gt, mask, eps, FitSpace::Inverse)
}

/// Metric depth from a linear fit, with the number of pixels whose fitted
/// value fell below `eps` and was clamped.
pub fn apply_linear_fit(pred_inv: &DepthMap, fit: &FitResult, eps: f32) -> Result<(DepthMap, usize)> {
    let LinearParams { scale, shift } = fit.params;
    let eps64 = eps as f64;
    let mut clamped = 0;
    let mut out = Vec::with_capacity(pred_inv.len());
    for &y in pred_inv.values() {
        let v = match fit.space {
            FitSpace::Inverse => scale * y as f64 + shift,
            FitSpace::Metric => scale / (y as f64).max(eps64) + shift,
        };
        let v = if v < eps64 {
            clamped += 1;
            eps64
        } else {
            v
        };
        out.push(match fit.space {
            FitSpace::Inverse => (1.0 / v) as f32,
            FitSpace::Metric => v as f32,
        });
    }
    Ok((DepthMap::new(pred_inv.height(), pred_inv.width(), out)?, clamped))
}

/// Borrowed view of one image for dataset-level fitting.
#[derive(Debug, Clone, Copy)]
pub struct AlignmentSample<'a> {
    pub inv_rel: &'a DepthMap,
    pub gt: &'a DepthMap,
    pub mask: &'a ValidityMask,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GlobalFitConfig {
    pub iterations: usize,
    /// Peak step size in log-parameter space; decays by cosine to `lr / 100`.
    pub lr: f64,
    pub init: ScaleShift,
    /// Images per step; `None` uses every image every step.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for GlobalFitConfig {
    fn default() -> Self {
        Self {
            iterations: 1500,
            lr: 0.05,
            init: ScaleShift { alpha: 1.0, beta: 1.0 },
            batch_size: None,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GlobalFit {
    pub params: ScaleShift,
    /// Mean per-image masked L1 loss over the whole dataset at `params`.
    pub loss: f64,
    pub iterations: usize,
}

/// Mean over images of the masked L1 loss of the aligned prediction.
pub fn dataset_loss(samples: &[AlignmentSample<'_>], params: ScaleShift) -> Result<f64> {
    let (loss, _, _) = dataset_loss_grad(samples, params, None)?;
    Ok(loss)
}

fn dataset_loss_grad(
    samples: &[AlignmentSample<'_>],
    params: ScaleShift,
    subset: Option<&[usize]>,
) -> Result<(f64, f64, f64)> {
    let all: Vec<usize>;
    let idx = match subset {
        Some(s) => s,
        None => {
            all = (0..samples.len()).collect();
            &all
        }
    };
    let (mut loss, mut ga, mut gb, mut n) = (0.0, 0.0, 0.0, 0usize);
    for &i in idx {
        let s = &samples[i];
        if s.mask.count() == 0 {
            continue;
        }
        let al = alignment_loss(s.inv_rel, s.gt, s.mask, params)?;
        let (da, db) = al.log_gradient(params);
        loss += al.loss;
        ga += da;
        gb += db;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMask("no sample has a valid pixel"));
    }
    let n = n as f64;
    Ok((loss / n, ga / n, gb / n))
}

/// One `(alpha, beta)` for a whole dataset, minimizing the mean masked L1
/// loss by Adam over `(ln alpha, ln beta)`. Returns the best iterate seen.
pub fn global_fit(samples: &[AlignmentSample<'_>], cfg: &GlobalFitConfig) -> Result<GlobalFit> {
    if samples.is_empty() {
        return Err(Error::Empty("global fit needs at least one sample"));
    }
    if !samples.iter().any(|s| s.mask.count() > 0) {
        return Err(Error::EmptyMask("no sample has a valid pixel"));
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "global fit lr must be > 0, got {}",
            cfg.lr
        )));
    }
    for s in samples {
        ensure_same_shape(s.inv_rel, s.gt, "ground truth")?;
        ensure_same_shape(s.inv_rel, s.mask, "mask")?;
    }
    let init = ScaleShift::new(cfg.init.alpha, cfg.init.beta)?;
    let mut logp = [init.alpha.ln(), init.beta.ln()];
    let (mut m, mut v) = ([0.0; 2], [0.0; 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();

    let current = |lp: &[f64; 2]| ScaleShift {
        alpha: lp[0].exp(),
        beta: lp[1].exp(),
    };
    let mut best = GlobalFit {
        params: init,
        loss: dataset_loss(samples, init)?,
        iterations: 0,
    };
    let mut last_finite = init;
    for it in 0..cfg.iterations {
        let p = current(&logp);
        let subset = match cfg.batch_size {
            Some(b) if b < samples.len() => {
                order.shuffle(&mut rng);
                Some(&order[..b.max(1)])
            }
            _ => None,
        };
        let (loss, ga, gb) = dataset_loss_grad(samples, p, subset)?;
        if !(loss.is_finite() && ga.is_finite() && gb.is_finite()) || !(p.alpha > 0.0 && p.beta > 0.0) {
            return Err(Error::Diverged {
                iteration: it,
                alpha: last_finite.alpha,
                beta: last_finite.beta,
            });
        }
        last_finite = p;
        let lr = cosine_lr(it, cfg.iterations, cfg.lr, cfg.lr * 1e-2);
        adam_update(&mut logp, &[ga, gb], &mut m, &mut v, it as u64 + 1, lr, &cfg.adam);
        // keep exp() representable
        for lp in &mut logp {
            *lp = lp.clamp(-40.0, 40.0);
        }
        let next = current(&logp);
        let cand_loss = dataset_loss(samples, next)?;
        if cand_loss < best.loss {
            best = GlobalFit {
                params: next,
                loss: cand_loss,
                iterations: it + 1,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::apply_alignment;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn row(v: &[f32]) -> DepthMap {
        DepthMap::from_row(v).unwrap()
    }

    fn inv(d: &[f32]) -> DepthMap {
        row(&d.iter().map(|x| 1.0 / x).collect::<Vec<_>>())
    }

    #[test]
    fn lower_median_convention() {
        assert_eq!(lower_median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[]), None);
    }

    #[test]
    fn median_exact_proportionality() {
        let m = ValidityMask::full(1, 3).unwrap();
        let out = median_scale(&inv(&[1.0, 2.0, 4.0]), &row(&[2.0, 4.0, 8.0]), &m, 1e-6).unwrap();
        assert_relative_eq!(out.scale, 2.0, max_relative = 1e-6);
        for (a, b) in out.depth.values().iter().zip([2.0, 4.0, 8.0]) {
            assert_relative_eq!(*a, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn median_identity_when_already_metric() {
        let gt = row(&[0.5, 1.0, 2.0, 4.0]);
        let m = ValidityMask::full(1, 4).unwrap();
        let out = median_scale(&invert(&gt, 1e-6).unwrap(), &gt, &m, 1e-6).unwrap();
        assert_relative_eq!(out.scale, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn median_masked_subset() {
        // valid depth {1,4,9} -> 4, valid gt {2,6,8} -> 6
        let m = ValidityMask::from_row(&[true, false, true, true]).unwrap();
        let out = median_scale(&inv(&[1.0, 3.0, 4.0, 9.0]), &row(&[2.0, 0.0, 6.0, 8.0]), &m, 1e-6).unwrap();
        assert_relative_eq!(out.scale, 1.5, max_relative = 1e-6);
    }

    #[test]
    fn median_empty_mask() {
        let m = ValidityMask::from_row(&[false, false]).unwrap();
        assert!(matches!(
            median_scale(&row(&[1.0, 2.0]), &row(&[1.0, 2.0]), &m, 1e-6),
            Err(Error::EmptyMask(_))
        ));
    }

    #[test]
    fn linear_fit_two_points() {
        let m = ValidityMask::full(1, 2).unwrap();
        let gt = row(&[1.0 / 3.0, 1.0 / 5.0]);
        let fit = linear_fit_inverse("a", &row(&[1.0, 2.0]), &gt, &m, 1e-6).unwrap();
        assert_relative_eq!(fit.params.scale, 2.0, max_relative = 1e-6);
        assert_relative_eq!(fit.params.shift, 1.0, max_relative = 1e-6);
        assert!(fit.residual < 1e-10);
        assert_eq!(fit.n_valid, 2);
    }

    #[test]
    fn linear_fit_three_points() {
        // normal equations n=3, sum y=3, sum y^2=5, sum g=7, sum yg=10
        let (p, r) = least_squares_line("x", &[0.0, 1.0, 2.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(p.scale, 1.5, epsilon = 1e-12);
        assert_relative_eq!(p.shift, 0.8333333333333334, epsilon = 1e-12);
        assert_relative_eq!(r, 0.16666666666666666, epsilon = 1e-12);
    }

    #[test]
    fn linear_fit_identity() {
        let y = row(&[0.2, 0.5, 1.0, 2.5]);
        let gt = invert(&y, 1e-6).unwrap();
        let m = ValidityMask::full(1, 4).unwrap();
        let fit = linear_fit_inverse("id", &y, &gt, &m, 1e-6).unwrap();
        assert_relative_eq!(fit.params.scale, 1.0, max_relative = 1e-5);
        assert!(fit.params.shift.abs() < 1e-5);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn linear_fit_singular_names_image() {
        let m = ValidityMask::full(1, 3).unwrap();
        let err = linear_fit_inverse("img_042", &row(&[0.5, 0.5, 0.5]), &row(&[1.0, 2.0, 3.0]), &m, 1e-6).unwrap_err();
        match err {
            Error::SingularFit { image_id, .. } => assert_eq!(image_id, "img_042"),
            e => panic!("unexpected {e}"),
        }
        let one = ValidityMask::from_row(&[true, false, false]).unwrap();
        assert!(linear_fit_inverse("x", &row(&[0.1, 0.2, 0.3]), &row(&[1.0, 2.0, 3.0]), &one, 1e-6).is_err());
    }

    #[test]
    fn metric_space_fit_recovers_affine_depth() {
        let y = row(&[0.25, 0.5, 1.0, 2.0]);
        let d: Vec<f32> = y.values().iter().map(|v| 3.0 / v + 0.5).collect();
        let m = ValidityMask::full(1, 4).unwrap();
        let fit = linear_fit("m", &y, &row(&d), &m, 1e-6, FitSpace::Metric).unwrap();
        assert_relative_eq!(fit.params.scale, 3.0, max_relative = 1e-5);
        assert_relative_eq!(fit.params.shift, 0.5, max_relative = 1e-4);
        let (out, clamped) = apply_linear_fit(&y, &fit, 1e-6).unwrap();
        assert_eq!(clamped, 0);
        for (a, b) in out.values().iter().zip(&d) {
            assert_relative_eq!(*a, *b, max_relative = 1e-5);
        }
    }

    #[test]
    fn negative_fitted_inverse_depth_is_clamped_and_counted() {
        let fit = FitResult {
            params: LinearParams {
                scale: -1.0,
                shift: 0.5,
            },
            residual: 0.0,
            n_valid: 2,
            space: FitSpace::Inverse,
        };
        let (out, clamped) = apply_linear_fit(&row(&[0.0, 1.0, 2.0]), &fit, 1e-3).unwrap();
        assert_eq!(clamped, 2);
        assert_eq!(out.values()[0], 2.0);
        assert_relative_eq!(out.values()[1], 1000.0, max_relative = 1e-6);
    }

    fn synthetic_pair(alpha: f64, beta: f64, n: usize, phase: f32) -> (DepthMap, DepthMap) {
        let y: Vec<f32> = (0..n).map(|i| ((i as f32) * 0.37 + phase).sin() * 0.5 + 0.5).collect();
        let y = DepthMap::new(1, n, y).unwrap();
        let gt = apply_alignment(&y, ScaleShift::new(alpha, beta).unwrap()).unwrap();
        (y, gt)
    }

    #[test]
    fn global_fit_recovers_forward_parameters() {
        let (y, gt) = synthetic_pair(2.0, 0.5, 64, 0.0);
        let m = ValidityMask::full(1, 64).unwrap();
        let samples = [AlignmentSample {
            inv_rel: &y,
            gt: &gt,
            mask: &m,
        }];
        let fit = global_fit(&samples, &GlobalFitConfig::default()).unwrap();
        assert_relative_eq!(fit.params.alpha, 2.0, max_relative = 0.01);
        assert_relative_eq!(fit.params.beta, 0.5, max_relative = 0.01);
    }

    #[test]
    fn global_fit_identity_drives_shift_down() {
        let y = DepthMap::new(1, 32, (0..32).map(|i| 0.2 + i as f32 * 0.1).collect()).unwrap();
        let gt = invert(&y, 1e-6).unwrap();
        let m = ValidityMask::full(1, 32).unwrap();
        let samples = [AlignmentSample {
            inv_rel: &y,
            gt: &gt,
            mask: &m,
        }];
        let fit = global_fit(&samples, &GlobalFitConfig::default()).unwrap();
        assert_relative_eq!(fit.params.alpha, 1.0, max_relative = 0.05);
        assert!(fit.loss < 5e-3, "loss {}", fit.loss);
        assert!(fit.params.beta > 0.0 && fit.params.beta < 0.01);
    }

    #[test]
    fn global_fit_beats_both_conflicting_optima() {
        let (y1, gt1) = synthetic_pair(1.0, 0.5, 48, 0.0);
        let (y2, gt2) = synthetic_pair(2.0, 0.5, 48, 1.3);
        let m = ValidityMask::full(1, 48).unwrap();
        let samples = [
            AlignmentSample {
                inv_rel: &y1,
                gt: &gt1,
                mask: &m,
            },
            AlignmentSample {
                inv_rel: &y2,
                gt: &gt2,
                mask: &m,
            },
        ];
        let fit = global_fit(&samples, &GlobalFitConfig::default()).unwrap();
        let l1 = dataset_loss(&samples, ScaleShift::new(1.0, 0.5).unwrap()).unwrap();
        let l2 = dataset_loss(&samples, ScaleShift::new(2.0, 0.5).unwrap()).unwrap();
        assert!(fit.loss <= l1.min(l2), "{} vs {l1} / {l2}", fit.loss);
        assert_relative_eq!(
            fit.loss,
            dataset_loss(&samples, fit.params).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn global_fit_errors() {
        assert!(global_fit(&[], &GlobalFitConfig::default()).is_err());
        let y = row(&[0.5]);
        let m = ValidityMask::from_row(&[false]).unwrap();
        let s = [AlignmentSample {
            inv_rel: &y,
            gt: &y,
            mask: &m,
        }];
        assert!(global_fit(&s, &GlobalFitConfig::default()).is_err());
    }

    #[test]
    fn global_fit_minibatch_is_seeded() {
        let pairs: Vec<_> = (0..6)
            .map(|i| synthetic_pair(1.0 + i as f64 * 0.2, 0.3, 16, i as f32))
            .collect();
        let m = ValidityMask::full(1, 16).unwrap();
        let samples: Vec<_> = pairs
            .iter()
            .map(|(y, g)| AlignmentSample {
                inv_rel: y,
                gt: g,
                mask: &m,
            })
            .collect();
        let cfg = GlobalFitConfig {
            batch_size: Some(2),
            iterations: 200,
            seed: 9,
            ..GlobalFitConfig::default()
        };
        assert_eq!(global_fit(&samples, &cfg).unwrap(), global_fit(&samples, &cfg).unwrap());
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<f32>, Vec<f32>, Vec<bool>)> {
        (3usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(0.05f32..5.0, n),
                prop::collection::vec(0.1f32..20.0, n),
                prop::collection::vec(prop::bool::weighted(0.7), n),
            )
        })
    }

    proptest! {
        #[test]
        fn linear_fit_is_no_worse_than_identity_or_median((y, gt, bits) in arb_instance()) {
            let n = y.len();
            let (y, gt) = (row(&y), row(&gt));
            let m = ValidityMask::new(1, n, bits).unwrap();
            prop_assume!(m.count() >= 2);
            let Ok(fit) = linear_fit_inverse("p", &y, &gt, &m, 1e-6) else { return Ok(()); };
            let x = masked_f64(&y, &m);
            let g = masked_f64(&invert(&gt, 1e-6).unwrap(), &m);
            let sse = |s: f64, t: f64| x.iter().zip(&g).map(|(a, b)| (s * a + t - b).powi(2)).sum::<f64>();
            let tol = 1e-9 * (1.0 + fit.residual);
            prop_assert!(fit.residual <= sse(1.0, 0.0) + tol);
            // median scaling in inverse space is a pure rescale by 1/s_med
            let med = median_scale(&y, &gt, &m, 1e-6).unwrap();
            prop_assert!(fit.residual <= sse(1.0 / med.scale, 0.0) + tol);
        }

        #[test]
        fn median_anchoring_exact_for_odd_masks((y, gt, bits) in arb_instance()) {
            let n = y.len();
            let m = ValidityMask::new(1, n, bits).unwrap();
            prop_assume!(m.count() % 2 == 1);
            let (y, gt) = (row(&y), row(&gt));
            let out = median_scale(&y, &gt, &m, 1e-6).unwrap();
            let a = lower_median(&out.depth.masked_values(&m).unwrap()).unwrap();
            let b = lower_median(&gt.masked_values(&m).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn pixels_outside_mask_do_not_matter((y, gt, bits) in arb_instance(), noise in 0.5f32..3.0) {
            let n = y.len();
            let m = ValidityMask::new(1, n, bits.clone()).unwrap();
            prop_assume!(m.count() >= 2);
            let perturb = |v: &[f32]| -> DepthMap {
                row(&v.iter().zip(&bits).map(|(&x, &b)| if b { x } else { x * noise + 0.1 }).collect::<Vec<_>>())
            };
            let (y0, g0) = (row(&y), row(&gt));
            let (y1, g1) = (perturb(&y), perturb(&gt));
            let a = linear_fit_inverse("p", &y0, &g0, &m, 1e-6);
            let b = linear_fit_inverse("p", &y1, &g1, &m, 1e-6);
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "fit success differs"),
            }
            prop_assert_eq!(
                median_scale(&y0, &g0, &m, 1e-6).unwrap().scale,
                median_scale(&y1, &g1, &m, 1e-6).unwrap().scale
            );
            let p = ScaleShift::new(1.3, 0.2).unwrap();
            prop_assert_eq!(
                alignment_loss(&y0, &g0, &m, p).unwrap(),
                alignment_loss(&y1, &g1, &m, p).unwrap()
            );
        }
    }
}
