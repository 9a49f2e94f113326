//! Mini-batch training of the head against precomputed relative depth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::depth::{DepthMap, ValidityMask};
use crate::error::{Error, Result};
use crate::head::mlp::{accumulate_gradient, MlpConfig, MlpParameters, TextEmbedding};
use crate::head::optim::{adam_step, cosine_lr, AdamConfig, AdamState};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            lr_max: 3e-5,
            lr_min: 1e-5,
            batch_size: 8,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_max && self.lr_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rates need 0 < lr_min <= lr_max, got {} / {}",
                self.lr_min, self.lr_max
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One image with everything needed to supervise the head.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub image_id: String,
    pub inv_rel: DepthMap,
    pub gt: DepthMap,
    pub mask: ValidityMask,
    pub embeddings: Vec<TextEmbedding>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: MlpParameters<f32>,
    pub optimizer: AdamState,
    pub history: Vec<EpochRecord>,
}

/// Uniform caption index in `0..count`.
pub fn sample_caption<R: Rng>(count: usize, rng: &mut R) -> Result<usize> {
    if count == 0 {
        return Err(Error::Empty("sample has no captions to choose from"));
    }
    Ok(rng.random_range(0..count))
}

/// Fresh parameters for `cfg`, drawn from the training seed.
pub fn initial_parameters(mlp: &MlpConfig, seed: u64) -> MlpParameters<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MlpParameters::init_uniform(mlp, &mut rng)
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    rng
}

/// Trains the head starting from `init` (or a seeded initialization) for
/// epochs `start_epoch..cfg.epochs`.
///
/// Each epoch shuffles the sample order, draws one caption per sample and
/// iteration, averages gradients over the batch and takes one Adam step per
/// batch with the epoch's cosine learning rate. Runs on one thread and is
/// bit-reproducible for a given seed and sample order.
pub fn train(
    samples: &[TrainingSample],
    mlp: &MlpConfig,
    cfg: &TrainConfig,
    init: Option<MlpParameters<f32>>,
    start_epoch: usize,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    mlp.validate()?;
    cfg.validate()?;
    let mut params = match init {
        Some(p) => {
            if !p.matches_config(mlp) {
                return Err(Error::InvalidParameter(
                    "initial parameters do not match the head config".into(),
                ));
            }
            p
        }
        None => initial_parameters(mlp, cfg.seed),
    };
    let mut optimizer = AdamState::new(mlp);
    let mut history = Vec::new();
    if cfg.epochs <= start_epoch {
        return Ok(TrainOutcome {
            params,
            optimizer,
            history,
        });
    }
    if samples.is_empty() {
        return Err(Error::Empty("training set is empty"));
    }
    for s in samples {
        if s.mask.count() == 0 {
            return Err(Error::EmptyMask("training sample without valid ground truth").in_sample(&s.image_id));
        }
        if s.embeddings.is_empty() {
            return Err(Error::Empty("training sample has no embeddings").in_sample(&s.image_id));
        }
    }

    let mut grads = MlpParameters::<f32>::zeros(mlp);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in start_epoch..cfg.epochs {
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);
        let mut rng = epoch_rng(cfg.seed, epoch);
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (iteration, batch) in order.chunks(cfg.batch_size).enumerate() {
            grads.fill_zero();
            let weight = 1.0 / batch.len() as f32;
            for &i in batch {
                let s = &samples[i];
                let c = sample_caption(s.embeddings.len(), &mut rng)?;
                let loss = accumulate_gradient(
                    s.embeddings[c].values(),
                    &s.inv_rel,
                    &s.gt,
                    &s.mask,
                    &params,
                    mlp,
                    weight,
                    &mut grads,
                )
                .map_err(|e| e.in_sample(&s.image_id))?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch, iteration });
                }
                loss_sum += loss;
            }
            adam_step(&mut params, &grads, &mut optimizer, lr, &cfg.adam).map_err(|e| match e {
                Error::NonFiniteGradient => Error::NonFiniteLoss { epoch, iteration },
                other => other,
            })?;
        }
        let record = EpochRecord {
            epoch,
            lr,
            mean_loss: loss_sum / samples.len() as f64,
        };
        on_epoch(&record);
        history.push(record);
    }
    Ok(TrainOutcome {
        params,
        optimizer,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_caption_always_index_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(sample_caption(1, &mut rng).unwrap(), 0);
        }
        assert!(sample_caption(0, &mut rng).is_err());
    }

    #[test]
    fn caption_sequence_reproducible() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..30)
                .map(|_| sample_caption(15, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    #[test]
    fn caption_frequencies_near_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 15];
        let n = 15_000;
        for _ in 0..n {
            counts[sample_caption(15, &mut rng).unwrap()] += 1;
        }
        let p = 1.0 / 15.0;
        let expected = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() <= 3.0 * sigma,
                "caption {i}: {c} vs {expected}"
            );
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 14 degrees of freedom, 99.9% quantile
        assert!(chi2 < 36.12, "chi2 = {chi2}");
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let mlp = MlpConfig {
            input_dim: 4,
            trunk_dims: vec![3],
            head_dims: vec![1],
            leaky_slope: 0.01,
        };
        let cfg = TrainConfig {
            epochs: 0,
            seed: 7,
            ..TrainConfig::default()
        };
        let out = train(&[], &mlp, &cfg, None, 0, |_| {}).unwrap();
        assert_eq!(out.params, initial_parameters(&mlp, 7));
        assert!(out.history.is_empty());
    }

    #[test]
    fn bad_config_rejected() {
        let mlp = MlpConfig::default();
        let cfg = TrainConfig {
            lr_min: 1e-3,
            lr_max: 1e-4,
            ..TrainConfig::default()
        };
        assert!(train(&[], &mlp, &cfg, None, 0, |_| {}).is_err());
    }
}
