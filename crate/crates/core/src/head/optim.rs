//! Adam and the per-epoch cosine learning-rate schedule.

use crate::error::{Error, Result};
use crate::head::mlp::{MlpConfig, MlpParameters, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// One bias-corrected Adam update over flat buffers. `step` is the 1-based
/// step index after incrementing.
pub fn adam_update<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    m: &mut [T],
    v: &mut [T],
    step: u64,
    lr: f64,
    cfg: &AdamConfig,
) {
    let c = |x: f64| T::from_f64(x).unwrap();
    let (b1, b2) = (c(cfg.beta1), c(cfg.beta2));
    let (one, eps, wd) = (T::one(), c(cfg.eps), c(cfg.weight_decay));
    let bc1 = c(1.0 - cfg.beta1.powi(step as i32));
    let bc2 = c(1.0 - cfg.beta2.powi(step as i32));
    let lr = c(lr);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        let g = if wd != T::zero() { g + wd * *p } else { g };
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: MlpParameters<f32>,
    pub v: MlpParameters<f32>,
}

impl AdamState {
    pub fn new(cfg: &MlpConfig) -> Self {
        Self {
            step: 0,
            m: MlpParameters::zeros(cfg),
            v: MlpParameters::zeros(cfg),
        }
    }
}

/// Applies one Adam step to every head parameter. A non-finite gradient
/// leaves parameters and state untouched.
pub fn adam_step(
    params: &mut MlpParameters<f32>,
    grads: &MlpParameters<f32>,
    state: &mut AdamState,
    lr: f64,
    cfg: &AdamConfig,
) -> Result<()> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidParameter(format!("learning rate must be > 0, got {lr}")));
    }
    if params.param_count() != grads.param_count() || params.param_count() != state.m.param_count() {
        return Err(Error::InvalidParameter(
            "adam: parameter, gradient and state shapes differ".into(),
        ));
    }
    if !grads.all_finite() {
        return Err(Error::NonFiniteGradient);
    }
    state.step += 1;
    let step = state.step;
    let moments = state.m.tensors_mut().zip(state.v.tensors_mut());
    for ((p, g), (m, v)) in params.tensors_mut().zip(grads.tensors()).zip(moments) {
        adam_update(p, g, m, v, step, lr, cfg);
    }
    Ok(())
}

/// `lr_min + (lr_max - lr_min) * (1 + cos(pi * epoch / epochs)) / 2`
pub fn cosine_lr(epoch: usize, epochs: usize, lr_max: f64, lr_min: f64) -> f64 {
    if epochs == 0 {
        return lr_max;
    }
    let progress = epoch.min(epochs) as f64 / epochs as f64;
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (std::f64::consts::PI * progress).cos())
}
