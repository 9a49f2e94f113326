//! Synthetic datasets in which scene category fixes the true `(alpha, beta)`.
//!
//! Every sample gets a smooth random inverse relative depth `y` in `[0, 1]`,
//! ground truth `1 / (alpha_c * y + beta_c)` and caption embeddings that
//! encode the category as a scaled basis vector plus Gaussian noise, so the
//! head can in principle reach zero loss.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::depth::{apply_alignment, DepthMap, DepthRange, ScaleShift};
use crate::error::{Error, Result};
use crate::io::{
    embedding_store_write, shuffled_captions, write_pfm, DatasetManifest, EmbeddingRef, EmbeddingStore, InstanceList,
    SampleRecord,
};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub instances: Vec<(String, u32)>,
}

const SCENES: [(&str, &[(&str, u32)]); 6] = [
    ("kitchen", &[("cabinet", 3), ("oven", 1), ("chair", 2), ("counter", 1)]),
    ("office", &[("desk", 2), ("monitor", 3), ("chair", 4), ("wall", 1)]),
    ("street", &[("car", 5), ("road", 1), ("building", 3), ("tree", 4)]),
    ("bedroom", &[("bed", 1), ("lamp", 2), ("pillow", 3), ("window", 1)]),
    ("highway", &[("truck", 2), ("car", 7), ("sky", 1), ("road", 1)]),
    ("classroom", &[("table", 6), ("chair", 12), ("board", 1), ("floor", 1)]),
];

impl CategorySpec {
    /// Category `c` of the default family: `alpha = 2 / 2^c`, `beta = alpha / 4`.
    pub fn default_for(c: usize) -> Self {
        let (name, inst) = SCENES[c % SCENES.len()];
        let alpha = 2.0 / 2f64.powi(c as i32);
        let suffix = if c < SCENES.len() {
            String::new()
        } else {
            format!("_{c}")
        };
        Self {
            name: format!("{name}{suffix}"),
            alpha,
            beta: alpha / 4.0,
            instances: inst.iter().map(|(s, n)| (s.to_string(), *n)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthSpec {
    pub categories: Vec<CategorySpec>,
    pub samples_per_category: usize,
    pub height: usize,
    pub width: usize,
    pub embedding_dim: usize,
    /// Standard deviation of the per-component embedding noise.
    pub embedding_noise: f64,
    /// Length of the category basis vector.
    pub code_scale: f64,
    pub captions_per_sample: usize,
    /// Fraction of each category written to the test manifest.
    pub holdout_fraction: f64,
    pub depth_range: DepthRange,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self::with_categories(3)
    }
}

impl SynthSpec {
    pub fn with_categories(n: usize) -> Self {
        Self {
            categories: (0..n).map(CategorySpec::default_for).collect(),
            samples_per_category: 200,
            height: 32,
            width: 32,
            embedding_dim: 1024,
            embedding_noise: 0.05,
            code_scale: 4.0,
            captions_per_sample: 3,
            holdout_fraction: 0.2,
            depth_range: DepthRange::NYU,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("synthetic spec: {m}")));
        if self.categories.is_empty() {
            return bad("need at least one category".into());
        }
        if self.categories.len() > self.embedding_dim {
            return bad(format!(
                "{} categories do not fit in embedding dim {}",
                self.categories.len(),
                self.embedding_dim
            ));
        }
        for c in &self.categories {
            if ScaleShift::new(c.alpha, c.beta).is_err() {
                return bad(format!("category '{}' needs alpha, beta > 0", c.name));
            }
            InstanceList::new(c.instances.clone())?;
        }
        if self.samples_per_category == 0 || self.height == 0 || self.width == 0 || self.captions_per_sample == 0 {
            return bad("counts and image size must be >= 1".into());
        }
        if !(self.embedding_noise >= 0.0 && self.embedding_noise.is_finite()) {
            return bad(format!("embedding noise must be >= 0, got {}", self.embedding_noise));
        }
        if !self.code_scale.is_finite() {
            return bad("code_scale must be finite".into());
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad(format!(
                "holdout fraction must be in [0, 1), got {}",
                self.holdout_fraction
            ));
        }
        DepthRange::new(self.depth_range.min_m, self.depth_range.max_m)?;
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        self.categories.len() * self.samples_per_category
    }

    fn holdout_per_category(&self) -> usize {
        (self.samples_per_category as f64 * self.holdout_fraction).round() as usize
    }
}

/// Smooth field in `[0, 1]`: a random tilt plus a few low-frequency waves,
/// min-max normalised.
pub fn smooth_inverse_depth<R: Rng>(height: usize, width: usize, rng: &mut R) -> Vec<f32> {
    let tilt = (rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5));
    let waves: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                rng.random_range(0.2..0.6),
                rng.random_range(-2.5..2.5),
                rng.random_range(-2.5..2.5),
                rng.random_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    let mut v = Vec::with_capacity(height * width);
    for r in 0..height {
        let vy = (r as f64 + 0.5) / height as f64;
        for c in 0..width {
            let ux = (c as f64 + 0.5) / width as f64;
            let mut z = tilt.0 * ux + tilt.1 * vy;
            for [amp, fx, fy, ph] in &waves {
                z += amp * (std::f64::consts::TAU * (fx * ux + fy * vy) + ph).sin();
            }
            v.push(z);
        }
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    v.iter().map(|&z| ((z - lo) / span) as f32).collect()
}

/// Paths of a generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub train_manifest: PathBuf,
    pub test_manifest: PathBuf,
    pub embeddings: PathBuf,
    pub n_train: usize,
    pub n_test: usize,
}

pub const TRAIN_MANIFEST: &str = "train.jsonl";
pub const TEST_MANIFEST: &str = "test.jsonl";
pub const EMBEDDING_FILE: &str = "embeddings.rsae";

/// Writes `{train,test}/{rel,gt}/*.pfm`, `embeddings.rsae`, `train.jsonl`
/// and `test.jsonl` under `out_dir`. Output bytes depend only on `spec`.
pub fn generate_synthetic_dataset(spec: &SynthSpec, out_dir: &Path) -> Result<SynthOutput> {
    spec.validate()?;
    for split in ["train", "test"] {
        for kind in ["rel", "gt"] {
            let d = out_dir.join(split).join(kind);
            std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
    }
    let noise = Normal::new(0.0, spec.embedding_noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let holdout = spec.holdout_per_category();
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(spec.sample_count() * spec.captions_per_sample);
    let (mut train, mut test) = (Vec::new(), Vec::new());

    for (ci, cat) in spec.categories.iter().enumerate() {
        let params = ScaleShift::new(cat.alpha, cat.beta)?;
        let instances = InstanceList::new(cat.instances.clone())?;
        for si in 0..spec.samples_per_category {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(((ci as u64) << 32) | si as u64);
            let id = format!("{}_{si:04}", cat.name);
            let y = DepthMap::new(
                spec.height,
                spec.width,
                smooth_inverse_depth(spec.height, spec.width, &mut rng),
            )?;
            let gt = apply_alignment(&y, params)?;
            let held_out = si + holdout >= spec.samples_per_category;
            let split = PathBuf::from(if held_out { "test" } else { "train" });
            let rel_path = split.join("rel").join(format!("{id}.pfm"));
            let gt_path = split.join("gt").join(format!("{id}.pfm"));
            write_pfm(out_dir.join(&rel_path), &y)?;
            write_pfm(out_dir.join(&gt_path), &gt)?;

            let captions = shuffled_captions(&instances, spec.captions_per_sample, &mut rng);
            let mut refs = Vec::with_capacity(captions.len());
            for _ in &captions {
                let mut e: Vec<f32> = (0..spec.embedding_dim).map(|_| noise.sample(&mut rng) as f32).collect();
                e[ci] += spec.code_scale as f32;
                refs.push(EmbeddingRef {
                    path: EMBEDDING_FILE.into(),
                    index: rows.len(),
                });
                rows.push(e);
            }
            let rec = SampleRecord {
                image_id: id,
                rel_depth: rel_path,
                gt_depth: gt_path,
                embeddings: refs,
                captions,
            };
            if held_out {
                test.push(rec);
            } else {
                train.push(rec);
            }
        }
    }

    let embeddings = out_dir.join(EMBEDDING_FILE);
    embedding_store_write(&embeddings, &EmbeddingStore::new(spec.embedding_dim, &rows)?)?;
    let manifest = |name: &str, records: Vec<SampleRecord>| DatasetManifest {
        name: name.to_string(),
        depth_range: spec.depth_range,
        records,
        base_dir: out_dir.to_path_buf(),
    };
    let (n_train, n_test) = (train.len(), test.len());
    let train_manifest = out_dir.join(TRAIN_MANIFEST);
    let test_manifest = out_dir.join(TEST_MANIFEST);
    manifest("synthetic-train", train).write(&train_manifest)?;
    manifest("synthetic-test", test).write(&test_manifest)?;
    Ok(SynthOutput {
        train_manifest,
        test_manifest,
        embeddings,
        n_train,
        n_test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_training_set;

    fn tiny() -> SynthSpec {
        SynthSpec {
            samples_per_category: 5,
            height: 6,
            width: 7,
            embedding_dim: 8,
            ..SynthSpec::with_categories(2)
        }
    }

    #[test]
    fn smooth_field_is_normalised() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = smooth_inverse_depth(16, 16, &mut rng);
        let lo = v.iter().copied().fold(f32::INFINITY, f32::min);
        let hi = v.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn counts_and_split() {
        let dir = tempfile::tempdir().unwrap();
        let out = generate_synthetic_dataset(&tiny(), dir.path()).unwrap();
        assert_eq!(out.n_train + out.n_test, 10);
        assert_eq!(out.n_test, 2);
        let m = DatasetManifest::read(&out.train_manifest).unwrap();
        assert_eq!(m.records.len(), 8);
        assert_eq!(m.records[0].captions.len(), 3);
        assert_eq!(m.records[0].embeddings.len(), 3);
    }

    #[test]
    fn noiseless_data_is_exactly_realizable() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            embedding_noise: 0.0,
            ..tiny()
        };
        let out = generate_synthetic_dataset(&spec, dir.path()).unwrap();
        let m = DatasetManifest::read(&out.train_manifest).unwrap();
        let samples = load_training_set(&m, 256.0).unwrap();
        for s in &samples {
            let c = if s.image_id.starts_with(&spec.categories[0].name) {
                0
            } else {
                1
            };
            let p = ScaleShift::new(spec.categories[c].alpha, spec.categories[c].beta).unwrap();
            let loss = crate::head::masked_l1_loss(&apply_alignment(&s.inv_rel, p).unwrap(), &s.gt, &s.mask).unwrap();
            assert_eq!(loss, 0.0);
            let e = s.embeddings[0].values();
            assert_eq!(e[c] as f64, spec.code_scale);
            assert!(e.iter().enumerate().all(|(i, &v)| i == c || v == 0.0));
        }
    }

    #[test]
    fn invalid_specs() {
        let mut s = tiny();
        s.embedding_noise = -0.1;
        assert!(s.validate().is_err());
        let mut s = tiny();
        s.categories[0].beta = 0.0;
        assert!(s.validate().is_err());
        let mut s = tiny();
        s.embedding_dim = 1;
        assert!(s.validate().is_err());
    }
}
