use depthscale::baselines::{linear_fit_inverse, FitResult};
use depthscale::{invert, DepthMap, ValidityMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const STEP: f64 = 1e-3;
const HALF_WIDTH: f64 = 0.2;

fn random_instance(rng: &mut ChaCha8Rng) -> (DepthMap, DepthMap, ValidityMask, f64, f64) {
    let s = rng.random_range(0.5..2.0);
    let t = rng.random_range(0.3..0.8);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let x: Vec<f32> = (0..64).map(|_| rng.random_range(0.0f32..1.0)).collect();
    let gt: Vec<f32> = x
        .iter()
        .map(|&xi| (1.0 / (s * xi as f64 + t + noise.sample(rng))) as f32)
        .collect();
    let bits: Vec<bool> = (0..64).map(|_| rng.random_bool(0.85)).collect();
    (
        DepthMap::new(8, 8, x).unwrap(),
        DepthMap::new(8, 8, gt).unwrap(),
        ValidityMask::new(8, 8, bits).unwrap(),
        s,
        t,
    )
}

fn masked(map: &DepthMap, mask: &ValidityMask) -> Vec<f64> {
    map.masked_values(mask).unwrap().into_iter().map(f64::from).collect()
}

/// Smallest squared residual over the grid `center +- HALF_WIDTH` at `STEP`,
/// with the grid point that attains it.
fn grid_min(x: &[f64], g: &[f64], s0: f64, t0: f64) -> (f64, f64, f64) {
    let n = (2.0 * HALF_WIDTH / STEP).round() as i64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        let s = s0 - HALF_WIDTH + i as f64 * STEP;
        for j in 0..=n {
            let t = t0 - HALF_WIDTH + j as f64 * STEP;
            let r: f64 = x.iter().zip(g).map(|(&xi, &gi)| (s * xi + t - gi).powi(2)).sum();
            if r < best.0 {
                best = (r, s, t);
            }
        }
    }
    best
}

#[test]
fn closed_form_beats_brute_force_grid() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..200 {
        let (y, gt, mask, s0, t0) = random_instance(&mut rng);
        let fit: FitResult = linear_fit_inverse(&format!("inst{k}"), &y, &gt, &mask, 1e-6).unwrap();
        let (s, t) = (fit.params.scale, fit.params.shift);
        // the box must bracket the optimum for the comparison to mean anything
        assert!(
            (s - s0).abs() < HALF_WIDTH && (t - t0).abs() < HALF_WIDTH,
            "instance {k}: ({s}, {t})"
        );
        let x = masked(&y, &mask);
        let g = masked(&invert(&gt, 1e-6).unwrap(), &mask);
        let (r_grid, gs, gt_) = grid_min(&x, &g, s0, t0);
        assert!(
            fit.residual <= r_grid * (1.0 + 1e-12),
            "instance {k}: closed form {} > grid {} at ({gs}, {gt_})",
            fit.residual,
            r_grid
        );
    }
    assert!(start.elapsed().as_secs_f64() < 10.0, "took {:?}", start.elapsed());
}
