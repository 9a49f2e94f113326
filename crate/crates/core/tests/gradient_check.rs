use depthscale::head::{forward_generic, loss_and_gradient, Linear, MlpConfig, MlpParameters};
use depthscale::{apply_alignment, DepthMap, ValidityMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;

fn small_config() -> MlpConfig {
    MlpConfig {
        input_dim: 4,
        trunk_dims: vec![3, 2],
        head_dims: vec![2, 1],
        leaky_slope: 0.01,
    }
}

struct Instance {
    x: Vec<f64>,
    y: DepthMap,
    gt: DepthMap,
    mask: ValidityMask,
    params: MlpParameters<f64>,
}

fn instance(seed: u64) -> Instance {
    let cfg = small_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..cfg.input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut params = MlpParameters::<f64>::init_uniform(&cfg, &mut rng);
    // nonzero biases so that no unit sits at the origin
    for l in params.layers_mut() {
        for b in &mut l.bias {
            *b = rng.random_range(-0.3..0.3);
        }
    }
    let y = DepthMap::new(2, 2, (0..4).map(|_| rng.random_range(0.1f32..1.0)).collect()).unwrap();
    let gt = DepthMap::new(2, 2, (0..4).map(|_| rng.random_range(0.3f32..3.0)).collect()).unwrap();
    Instance {
        x,
        y,
        gt,
        mask: ValidityMask::full(2, 2).unwrap(),
        params,
    }
}

fn loss_at(inst: &Instance, flat: &[f64]) -> f64 {
    let cfg = small_config();
    let p = MlpParameters::from_flat(&cfg, flat).unwrap();
    loss_and_gradient(&inst.x, &inst.y, &inst.gt, &inst.mask, &p, &cfg)
        .unwrap()
        .0
}

// Pre-activations of every hidden unit that feeds a LeakyReLU.
fn hidden_preactivations(x: &[f64], params: &MlpParameters<f64>, slope: f64) -> Vec<f64> {
    fn stack(input: &[f64], layers: &[Linear<f64>], slope: f64, out: &mut Vec<f64>) -> Vec<f64> {
        let mut h = input.to_vec();
        for (k, l) in layers.iter().enumerate() {
            let z: Vec<f64> = l
                .weight
                .chunks_exact(l.in_dim)
                .zip(&l.bias)
                .map(|(row, b)| b + row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>())
                .collect();
            if k + 1 < layers.len() {
                out.extend(&z);
                h = z.iter().map(|&v| if v > 0.0 { v } else { slope * v }).collect();
            } else {
                h = z;
            }
        }
        h
    }
    let mut z = Vec::new();
    let feat = stack(x, &params.trunk, slope, &mut z);
    stack(&feat, &params.scale_head, slope, &mut z);
    stack(&feat, &params.shift_head, slope, &mut z);
    z
}

/// A central difference across a LeakyReLU or L1 kink measures the average
/// of two slopes, not the gradient.
fn near_kink(inst: &Instance, margin: f64) -> bool {
    let cfg = small_config();
    let units = hidden_preactivations(&inst.x, &inst.params, cfg.leaky_slope as f64);
    let s = forward_generic(&inst.x, &inst.params, &cfg).unwrap();
    let pred = apply_alignment(&inst.y, s).unwrap();
    units.iter().any(|z| z.abs() < margin)
        || pred
            .values()
            .iter()
            .zip(inst.gt.values())
            .any(|(p, g)| ((p - g) as f64).abs() < margin)
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let cfg = small_config();
    let start = std::time::Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut accepted = 0;
    for seed in 0..64 {
        let inst = instance(seed);
        if near_kink(&inst, 1e-2) {
            continue;
        }
        accepted += 1;
        let (_, grads) = loss_and_gradient(&inst.x, &inst.y, &inst.gt, &inst.mask, &inst.params, &cfg).unwrap();
        let analytic = grads.flatten();
        let base = inst.params.flatten();
        for i in 0..base.len() {
            let mut plus = base.clone();
            plus[i] += H;
            let mut minus = base.clone();
            minus[i] -= H;
            let numeric = (loss_at(&inst, &plus) - loss_at(&inst, &minus)) / (2.0 * H);
            let a = analytic[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            assert!(
                rel < 1e-4,
                "seed {seed} param {i}: analytic {a} numeric {numeric} rel {rel}"
            );
            worst = worst.max(rel);
            checked += 1;
        }
    }
    assert!(accepted >= 20, "only {accepted} instances away from kinks");
    assert_eq!(checked, accepted * cfg.param_count());
    assert!(start.elapsed().as_secs_f64() < 30.0);
    eprintln!("max relative error {worst:.3e} over {checked} parameters");
}
