//! Dataset manifests as JSON lines.
//!
//! The first line is a header object with `name` and `depth_range`; each
//! following non-empty line is one [`SampleRecord`]. Relative paths resolve
//! against the manifest's directory.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::depth::{mask_from_ground_truth, DepthMap, DepthRange, ValidityMask};
use crate::error::{Error, Result};
use crate::head::{sample_caption, TextEmbedding, TrainingSample};
use crate::io::embeddings::{embedding_store_read, EmbeddingStore};
use crate::io::{pfm, png16};

pub const MANIFEST_FORMAT: &str = "depthscale-manifest";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingRef {
    pub path: PathBuf,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub image_id: String,
    pub rel_depth: PathBuf,
    pub gt_depth: PathBuf,
    pub embeddings: Vec<EmbeddingRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub captions: Vec<String>,
}

impl SampleRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.image_id.is_empty() {
            return Err("empty image_id".into());
        }
        if self.rel_depth.as_os_str().is_empty() || self.gt_depth.as_os_str().is_empty() {
            return Err(format!("'{}': empty depth path", self.image_id));
        }
        if self.embeddings.is_empty() {
            return Err(format!("'{}': needs at least one embedding reference", self.image_id));
        }
        if self.embeddings.iter().any(|e| e.path.as_os_str().is_empty()) {
            return Err(format!("'{}': empty embedding path", self.image_id));
        }
        Ok(())
    }

    /// Index of a uniformly chosen caption embedding.
    pub fn sample_caption<R: Rng>(&self, rng: &mut R) -> Result<usize> {
        sample_caption(self.embeddings.len(), rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    name: String,
    depth_range: DepthRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub depth_range: DepthRange,
    pub records: Vec<SampleRecord>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let header = Header {
            format: MANIFEST_FORMAT.into(),
            version: 1,
            name: self.name.clone(),
            depth_range: self.depth_range,
        };
        let mut out = json_line(&header)?;
        for r in &self.records {
            out.push_str(&json_line(r)?);
        }
        Ok(out)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let err = |line: usize, reason: String| Error::Manifest {
            path: path.into(),
            line,
            reason,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, htext) = lines.next().ok_or_else(|| err(1, "empty manifest".into()))?;
        let header: Header = serde_json::from_str(htext).map_err(|e| err(hline + 1, format!("header: {e}")))?;
        if header.format != MANIFEST_FORMAT || header.version != 1 {
            return Err(err(
                hline + 1,
                format!("unsupported manifest format {} v{}", header.format, header.version),
            ));
        }
        DepthRange::new(header.depth_range.min_m, header.depth_range.max_m)
            .map_err(|e| err(hline + 1, e.to_string()))?;
        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for (i, l) in lines {
            let rec: SampleRecord = serde_json::from_str(l).map_err(|e| err(i + 1, e.to_string()))?;
            rec.validate().map_err(|m| err(i + 1, m))?;
            if !seen.insert(rec.image_id.clone()) {
                return Err(err(i + 1, format!("duplicate image_id '{}'", rec.image_id)));
            }
            records.push(rec);
        }
        Ok(Self {
            name: header.name,
            depth_range: header.depth_range,
            records,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Loads a depth file by extension: `.png` as 16-bit PNG with `png_divisor`,
/// anything else as PFM.
pub fn load_depth(path: &Path, png_divisor: f64) -> Result<DepthMap> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        png16::read_depth_png16(path, png_divisor).map(|(d, _)| d)
    } else {
        pfm::read_pfm(path)
    }
}

/// Embedding stores opened so far, keyed by resolved path.
#[derive(Debug, Default)]
pub struct StoreCache {
    stores: HashMap<PathBuf, EmbeddingStore>,
}

impl StoreCache {
    pub fn embedding(&mut self, path: &Path, index: usize) -> Result<TextEmbedding> {
        if !self.stores.contains_key(path) {
            let s = embedding_store_read(path)?;
            self.stores.insert(path.to_path_buf(), s);
        }
        self.stores[path].embedding(index)
    }
}

/// A manifest record with its files loaded.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub image_id: String,
    pub inv_rel: DepthMap,
    pub gt: DepthMap,
    pub mask: ValidityMask,
    pub embeddings: Vec<TextEmbedding>,
}

impl From<LoadedSample> for TrainingSample {
    fn from(s: LoadedSample) -> Self {
        TrainingSample {
            image_id: s.image_id,
            inv_rel: s.inv_rel,
            gt: s.gt,
            mask: s.mask,
            embeddings: s.embeddings,
        }
    }
}

pub fn load_record(
    manifest: &DatasetManifest,
    rec: &SampleRecord,
    png_divisor: f64,
    stores: &mut StoreCache,
) -> Result<LoadedSample> {
    let mut inner = || -> Result<LoadedSample> {
        let inv_rel = load_depth(&manifest.resolve(&rec.rel_depth), png_divisor)?;
        let gt = load_depth(&manifest.resolve(&rec.gt_depth), png_divisor)?;
        inv_rel.same_shape(&gt, "ground truth")?;
        let mask = mask_from_ground_truth(&gt, manifest.depth_range);
        let embeddings = rec
            .embeddings
            .iter()
            .map(|e| stores.embedding(&manifest.resolve(&e.path), e.index))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedSample {
            image_id: rec.image_id.clone(),
            inv_rel,
            gt,
            mask,
            embeddings,
        })
    };
    inner().map_err(|e| e.in_sample(&rec.image_id))
}

/// Loads every record, in manifest order.
pub fn load_dataset(manifest: &DatasetManifest, png_divisor: f64) -> Result<Vec<LoadedSample>> {
    let mut stores = StoreCache::default();
    manifest
        .records
        .iter()
        .map(|r| load_record(manifest, r, png_divisor, &mut stores))
        .collect()
}

pub fn load_training_set(manifest: &DatasetManifest, png_divisor: f64) -> Result<Vec<TrainingSample>> {
    Ok(load_dataset(manifest, png_divisor)?
        .into_iter()
        .map(Into::into)
        .collect())
}
