//! The scale/shift head: a shared trunk followed by two scalar heads whose
//! outputs are exponentiated into `(alpha, beta)`.
//!
//! Every stack is a chain of affine layers with LeakyReLU between them and no
//! activation after the last layer. The same code runs in f32 (training) and
//! f64 (gradient checking).

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};
use rand::Rng;

use crate::depth::{DepthMap, ScaleShift, ValidityMask};
use crate::error::{Error, Result};
use crate::head::loss::{alignment_loss, AlignmentLoss};

pub trait Scalar: Float + FromPrimitive + AddAssign + Sum + Debug + Send + Sync + 'static {}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub trunk_dims: Vec<usize>,
    pub head_dims: Vec<usize>,
    pub leaky_slope: f32,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            input_dim: 1024,
            trunk_dims: vec![512, 512, 512, 256, 256],
            head_dims: vec![256, 128, 128, 64, 1],
            leaky_slope: 0.01,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("mlp config: {m}")));
        if self.input_dim == 0 {
            return bad("input_dim must be >= 1");
        }
        if self.trunk_dims.is_empty() || self.head_dims.is_empty() {
            return bad("trunk and head need at least one layer each");
        }
        if self.trunk_dims.iter().chain(&self.head_dims).any(|&d| d == 0) {
            return bad("layer widths must be >= 1");
        }
        if self.head_dims.last() != Some(&1) {
            return bad("heads must end in a single output unit");
        }
        if !(self.leaky_slope.is_finite() && self.leaky_slope >= 0.0) {
            return bad("leaky_slope must be finite and >= 0");
        }
        Ok(())
    }

    /// Width of the shared feature fed to both heads.
    pub fn feature_dim(&self) -> usize {
        *self.trunk_dims.last().unwrap_or(&self.input_dim)
    }

    fn layer_shapes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let chain = |first: usize, dims: &'_ [usize]| {
            std::iter::once(first)
                .chain(dims.iter().copied())
                .zip(dims.iter().copied())
                .collect::<Vec<_>>()
        };
        let trunk = chain(self.input_dim, &self.trunk_dims);
        let head = chain(self.feature_dim(), &self.head_dims);
        trunk.into_iter().chain(head.clone()).chain(head)
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().map(|(i, o)| i * o + o).sum()
    }
}

/// Affine layer `out = W x + b`, `W` stored row-major as `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![T::zero(); in_dim * out_dim],
            bias: vec![T::zero(); out_dim],
        }
    }

    fn forward_into(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend(self.weight.chunks_exact(self.in_dim).zip(&self.bias).map(|(row, &b)| {
            let mut acc = b;
            for (&w, &xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            acc
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters<T = f32> {
    pub trunk: Vec<Linear<T>>,
    pub scale_head: Vec<Linear<T>>,
    pub shift_head: Vec<Linear<T>>,
}

fn stack<T: Scalar>(first: usize, dims: &[usize], make: &mut impl FnMut(usize, usize) -> Linear<T>) -> Vec<Linear<T>> {
    let mut prev = first;
    dims.iter()
        .map(|&d| {
            let l = make(prev, d);
            prev = d;
            l
        })
        .collect()
}

impl<T: Scalar> MlpParameters<T> {
    fn build(cfg: &MlpConfig, mut make: impl FnMut(usize, usize) -> Linear<T>) -> Self {
        let k = cfg.feature_dim();
        let trunk = stack(cfg.input_dim, &cfg.trunk_dims, &mut make);
        let scale_head = stack(k, &cfg.head_dims, &mut make);
        let shift_head = stack(k, &cfg.head_dims, &mut make);
        Self {
            trunk,
            scale_head,
            shift_head,
        }
    }

    pub fn zeros(cfg: &MlpConfig) -> Self {
        Self::build(cfg, Linear::zeros)
    }

    /// Weights uniform in `+-sqrt(1/fan_in)`, biases zero.
    pub fn init_uniform<R: Rng>(cfg: &MlpConfig, rng: &mut R) -> Self {
        Self::build(cfg, |i, o| {
            let bound = (1.0 / i as f64).sqrt();
            let mut l = Linear::zeros(i, o);
            for w in &mut l.weight {
                *w = T::from_f64(rng.random_range(-bound..bound)).unwrap();
            }
            l
        })
    }

    pub fn layers(&self) -> impl Iterator<Item = &Linear<T>> {
        self.trunk.iter().chain(&self.scale_head).chain(&self.shift_head)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut Linear<T>> {
        self.trunk
            .iter_mut()
            .chain(&mut self.scale_head)
            .chain(&mut self.shift_head)
    }

    /// Weight and bias buffers in canonical order: trunk, scale head, shift
    /// head; within a layer weight then bias.
    pub fn tensors(&self) -> impl Iterator<Item = &[T]> {
        self.layers().flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [T]> {
        self.layers_mut()
            .flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn param_count(&self) -> usize {
        self.tensors().map(<[T]>::len).sum()
    }

    pub fn flatten(&self) -> Vec<T> {
        self.tensors().flat_map(|t| t.iter().copied()).collect()
    }

    pub fn from_flat(cfg: &MlpConfig, flat: &[T]) -> Result<Self> {
        cfg.validate()?;
        let mut p = Self::zeros(cfg);
        if flat.len() != p.param_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters for this config, got {}",
                p.param_count(),
                flat.len()
            )));
        }
        let mut rest = flat;
        for t in p.tensors_mut() {
            let (head, tail) = rest.split_at(t.len());
            t.copy_from_slice(head);
            rest = tail;
        }
        Ok(p)
    }

    pub fn cast<U: Scalar>(&self) -> MlpParameters<U> {
        let conv = |l: &Linear<T>| Linear {
            in_dim: l.in_dim,
            out_dim: l.out_dim,
            weight: l
                .weight
                .iter()
                .map(|&w| U::from_f64(w.to_f64().unwrap()).unwrap())
                .collect(),
            bias: l
                .bias
                .iter()
                .map(|&b| U::from_f64(b.to_f64().unwrap()).unwrap())
                .collect(),
        };
        MlpParameters {
            trunk: self.trunk.iter().map(conv).collect(),
            scale_head: self.scale_head.iter().map(conv).collect(),
            shift_head: self.shift_head.iter().map(conv).collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(T::zero());
        }
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &Self, factor: T) {
        for (a, b) in self.tensors_mut().zip(other.tensors()) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += factor * y;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn matches_config(&self, cfg: &MlpConfig) -> bool {
        let zero = Self::zeros(cfg);
        self.layers().count() == zero.layers().count()
            && self.layers().zip(zero.layers()).all(|(a, b)| {
                a.in_dim == b.in_dim
                    && a.out_dim == b.out_dim
                    && a.weight.len() == b.weight.len()
                    && a.bias.len() == b.bias.len()
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextEmbedding {
    values: Vec<f32>,
}

impl TextEmbedding {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("embedding must have dim >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "embedding component {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Per-layer inputs and pre-activations kept for the backward pass.
struct StackTape<T> {
    inputs: Vec<Vec<T>>,
    pre: Vec<Vec<T>>,
}

fn forward_stack<T: Scalar>(
    layers: &[Linear<T>],
    x: &[T],
    slope: T,
    stage: &'static str,
) -> Result<(Vec<T>, StackTape<T>)> {
    let mut tape = StackTape {
        inputs: Vec::with_capacity(layers.len()),
        pre: Vec::with_capacity(layers.len()),
    };
    let mut cur = x.to_vec();
    let last = layers.len() - 1;
    for (i, layer) in layers.iter().enumerate() {
        let mut z = Vec::with_capacity(layer.out_dim);
        layer.forward_into(&cur, &mut z);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation { stage, layer: i });
        }
        let out = if i < last {
            z.iter().map(|&v| if v > T::zero() { v } else { v * slope }).collect()
        } else {
            z.clone()
        };
        tape.inputs.push(std::mem::replace(&mut cur, out));
        tape.pre.push(z);
    }
    Ok((cur, tape))
}

/// Accumulates `weight * dL/dparams` into `grads` and returns `dL/dx`
/// (skipped, returning an empty vector, when `need_input_grad` is false).
fn backward_stack<T: Scalar>(
    layers: &[Linear<T>],
    tape: &StackTape<T>,
    grad_out: &[T],
    slope: T,
    grads: &mut [Linear<T>],
    need_input_grad: bool,
) -> Vec<T> {
    let last = layers.len() - 1;
    let mut g = grad_out.to_vec();
    for i in (0..layers.len()).rev() {
        let layer = &layers[i];
        if i < last {
            for (gj, &z) in g.iter_mut().zip(&tape.pre[i]) {
                if z <= T::zero() {
                    *gj = *gj * slope;
                }
            }
        }
        let input = &tape.inputs[i];
        let gl = &mut grads[i];
        for (o, &go) in g.iter().enumerate() {
            gl.bias[o] += go;
            if go != T::zero() {
                let row = &mut gl.weight[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (w, &a) in row.iter_mut().zip(input) {
                    *w += go * a;
                }
            }
        }
        if i == 0 && !need_input_grad {
            return Vec::new();
        }
        let mut gin = vec![T::zero(); layer.in_dim];
        for (row, &go) in layer.weight.chunks_exact(layer.in_dim).zip(&g) {
            if go != T::zero() {
                for (gi, &w) in gin.iter_mut().zip(row) {
                    *gi += go * w;
                }
            }
        }
        g = gin;
    }
    g
}

struct ForwardTape<T> {
    trunk: StackTape<T>,
    scale: StackTape<T>,
    shift: StackTape<T>,
}

fn check_input<T: Scalar>(x: &[T], cfg: &MlpConfig, params: &MlpParameters<T>) -> Result<()> {
    if x.len() != cfg.input_dim {
        return Err(Error::InvalidParameter(format!(
            "embedding dim {} does not match head input dim {}",
            x.len(),
            cfg.input_dim
        )));
    }
    if !params.matches_config(cfg) {
        return Err(Error::InvalidParameter(
            "parameter shapes do not match the head config".into(),
        ));
    }
    Ok(())
}

fn forward_taped<T: Scalar>(
    x: &[T],
    params: &MlpParameters<T>,
    cfg: &MlpConfig,
) -> Result<(ScaleShift, ForwardTape<T>)> {
    check_input(x, cfg, params)?;
    let slope = T::from_f32(cfg.leaky_slope).unwrap();
    let (feat, trunk) = forward_stack(&params.trunk, x, slope, "trunk")?;
    let (a, scale) = forward_stack(&params.scale_head, &feat, slope, "scale head")?;
    let (b, shift) = forward_stack(&params.shift_head, &feat, slope, "shift head")?;
    let alpha = a[0].to_f64().unwrap().exp();
    let beta = b[0].to_f64().unwrap().exp();
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::NonFiniteActivation {
            stage: "scale output",
            layer: params.scale_head.len(),
        });
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::NonFiniteActivation {
            stage: "shift output",
            layer: params.shift_head.len(),
        });
    }
    Ok((ScaleShift { alpha, beta }, ForwardTape { trunk, scale, shift }))
}

/// Predicted `(alpha, beta)` for one embedding.
pub fn forward(embedding: &TextEmbedding, params: &MlpParameters<f32>, cfg: &MlpConfig) -> Result<ScaleShift> {
    forward_generic(embedding.values(), params, cfg)
}

pub fn forward_generic<T: Scalar>(x: &[T], params: &MlpParameters<T>, cfg: &MlpConfig) -> Result<ScaleShift> {
    forward_taped(x, params, cfg).map(|(p, _)| p)
}

/// Adds `weight * d loss / d params` into `grads` and returns the loss of the
/// aligned prediction for this sample.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_gradient<T: Scalar>(
    x: &[T],
    inv_rel: &DepthMap,
    gt: &DepthMap,
    mask: &ValidityMask,
    params: &MlpParameters<T>,
    cfg: &MlpConfig,
    weight: T,
    grads: &mut MlpParameters<T>,
) -> Result<f64> {
    let (pred, tape) = forward_taped(x, params, cfg)?;
    let al: AlignmentLoss = alignment_loss(inv_rel, gt, mask, pred)?;
    let (d_log_alpha, d_log_beta) = al.log_gradient(pred);
    let slope = T::from_f32(cfg.leaky_slope).unwrap();
    let ga = [weight * T::from_f64(d_log_alpha).unwrap()];
    let gb = [weight * T::from_f64(d_log_beta).unwrap()];
    let mut d_feat = backward_stack(&params.scale_head, &tape.scale, &ga, slope, &mut grads.scale_head, true);
    let d_feat_b = backward_stack(&params.shift_head, &tape.shift, &gb, slope, &mut grads.shift_head, true);
    for (a, b) in d_feat.iter_mut().zip(d_feat_b) {
        *a += b;
    }
    backward_stack(&params.trunk, &tape.trunk, &d_feat, slope, &mut grads.trunk, false);
    Ok(al.loss)
}

/// Masked L1 loss of the aligned prediction and its exact gradient with
/// respect to every head parameter.
pub fn loss_and_gradient<T: Scalar>(
    x: &[T],
    inv_rel: &DepthMap,
    gt: &DepthMap,
    mask: &ValidityMask,
    params: &MlpParameters<T>,
    cfg: &MlpConfig,
) -> Result<(f64, MlpParameters<T>)> {
    let mut grads = MlpParameters::zeros(cfg);
    let loss = accumulate_gradient(x, inv_rel, gt, mask, params, cfg, T::one(), &mut grads)?;
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    First,
    Mean,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Self::First),
            "mean" => Ok(Self::Mean),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregation '{other}' (first|mean)"
            ))),
        }
    }
}

/// Test-time prediction from one or more caption embeddings of the same image.
pub fn predict(
    embeddings: &[TextEmbedding],
    params: &MlpParameters<f32>,
    cfg: &MlpConfig,
    aggregation: Aggregation,
) -> Result<ScaleShift> {
    let first = embeddings
        .first()
        .ok_or(Error::Empty("prediction needs at least one embedding"))?;
    match aggregation {
        Aggregation::First => forward(first, params, cfg),
        Aggregation::Mean => {
            let (mut a, mut b) = (0.0, 0.0);
            for e in embeddings {
                let p = forward(e, params, cfg)?;
                a += p.alpha;
                b += p.beta;
            }
            let n = embeddings.len() as f64;
            ScaleShift::new(a / n, b / n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::apply_alignment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> MlpConfig {
        MlpConfig {
            input_dim: 4,
            trunk_dims: vec![3, 2],
            head_dims: vec![2, 1],
            leaky_slope: 0.01,
        }
    }

    #[test]
    fn default_config_matches_published_layout() {
        let cfg = MlpConfig::default();
        cfg.validate().unwrap();
        let p = MlpParameters::<f32>::zeros(&cfg);
        let trunk: Vec<_> = p.trunk.iter().map(|l| (l.in_dim, l.out_dim)).collect();
        assert_eq!(trunk, vec![(1024, 512), (512, 512), (512, 512), (512, 256), (256, 256)]);
        for head in [&p.scale_head, &p.shift_head] {
            let dims: Vec<_> = head.iter().map(|l| (l.in_dim, l.out_dim)).collect();
            assert_eq!(dims, vec![(256, 256), (256, 128), (128, 128), (128, 64), (64, 1)]);
        }
        assert_eq!(p.param_count(), cfg.param_count());
    }

    #[test]
    fn config_validation() {
        let mut c = small_cfg();
        c.head_dims = vec![2, 2];
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.trunk_dims = vec![];
        assert!(c.validate().is_err());
        let mut c = small_cfg();
        c.input_dim = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_network_predicts_unit_parameters() {
        let cfg = MlpConfig::default();
        let p = MlpParameters::zeros(&cfg);
        let e = TextEmbedding::new(vec![0.3; 1024]).unwrap();
        let out = forward(&e, &p, &cfg).unwrap();
        assert_eq!(out, ScaleShift { alpha: 1.0, beta: 1.0 });
        let y = DepthMap::from_row(&[0.0, 1.0, 3.0, 0.5]).unwrap();
        let aligned = apply_alignment(&y, out).unwrap();
        for (&a, &yi) in aligned.values().iter().zip(y.values()) {
            assert_eq!(a, 1.0 / (yi + 1.0));
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let cfg = small_cfg();
        let p = MlpParameters::zeros(&cfg);
        let e = TextEmbedding::new(vec![1.0; 5]).unwrap();
        assert!(forward(&e, &p, &cfg).is_err());
    }

    #[test]
    fn huge_weights_report_layer() {
        let cfg = small_cfg();
        let mut p = MlpParameters::<f32>::zeros(&cfg);
        p.trunk[1].weight.fill(f32::MAX);
        p.trunk[0].bias.fill(1.0);
        let e = TextEmbedding::new(vec![1.0; 4]).unwrap();
        let err = forward(&e, &p, &cfg).unwrap_err();
        assert!(
            matches!(
                err,
                Error::NonFiniteActivation {
                    stage: "trunk",
                    layer: 1
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn outputs_are_positive_for_random_parameters() {
        let cfg = MlpConfig {
            input_dim: 16,
            trunk_dims: vec![8, 8],
            head_dims: vec![4, 1],
            leaky_slope: 0.01,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = MlpParameters::<f32>::init_uniform(&cfg, &mut rng);
            let e = TextEmbedding::new((0..16).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
            let out = forward(&e, &p, &cfg).unwrap();
            assert!(out.alpha > 0.0 && out.beta > 0.0);
        }
    }

    #[test]
    fn flatten_roundtrip() {
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = MlpParameters::<f32>::init_uniform(&cfg, &mut rng);
        let q = MlpParameters::from_flat(&cfg, &p.flatten()).unwrap();
        assert_eq!(p, q);
        assert!(MlpParameters::<f32>::from_flat(&cfg, &[0.0; 3]).is_err());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = small_cfg();
        let a = MlpParameters::<f32>::init_uniform(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        let b = MlpParameters::<f32>::init_uniform(&cfg, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        for l in a.layers() {
            let bound = (1.0 / l.in_dim as f32).sqrt();
            assert!(l.weight.iter().all(|w| w.abs() <= bound));
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn shift_bias_gradient_sign_on_single_pixel() {
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = MlpParameters::<f64>::init_uniform(&cfg, &mut rng);
        let x = [0.2, -0.4, 0.9, 0.1];
        let y = DepthMap::from_row(&[0.7]).unwrap();
        let m = ValidityMask::full(1, 1).unwrap();
        for gt_val in [0.1f32, 5.0] {
            let gt = DepthMap::from_row(&[gt_val]).unwrap();
            let (_, g) = loss_and_gradient(&x, &y, &gt, &m, &p, &cfg).unwrap();
            let pred = forward_generic(&x, &p, &cfg).unwrap();
            let yhat = pred.depth_of(0.7f32 as f64);
            let s = (yhat - gt_val as f64).signum() * yhat * yhat * pred.beta;
            let db = g.shift_head.last().unwrap().bias[0];
            assert_eq!(db.signum(), -s.signum(), "gt={gt_val}");
        }
    }

    #[test]
    fn predict_aggregations() {
        let cfg = small_cfg();
        let mut p = MlpParameters::<f32>::zeros(&cfg);
        let e1 = TextEmbedding::new(vec![0.0; 4]).unwrap();
        let e2 = TextEmbedding::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            predict(std::slice::from_ref(&e1), &p, &cfg, Aggregation::First).unwrap(),
            forward(&e1, &p, &cfg).unwrap()
        );
        assert_eq!(
            predict(&[e1.clone(), e1.clone()], &p, &cfg, Aggregation::Mean).unwrap(),
            forward(&e1, &p, &cfg).unwrap()
        );
        // Route the first input component straight to both raw outputs so that
        // e1 -> (1,1) and e2 -> (e^k, e^k) with e^k = 3.
        let k = 3.0f32.ln();
        p.trunk[0].weight[0] = 1.0;
        p.trunk[1].weight[0] = 1.0;
        for head in [&mut p.scale_head, &mut p.shift_head] {
            head[0].weight[0] = 1.0;
            head[1].weight[0] = k;
        }
        let out = predict(&[e1, e2], &p, &cfg, Aggregation::Mean).unwrap();
        approx::assert_relative_eq!(out.alpha, 2.0, max_relative = 1e-6);
        approx::assert_relative_eq!(out.beta, 2.0, max_relative = 1e-6);
        assert!(predict(&[], &p, &cfg, Aggregation::First).is_err());
    }
}
