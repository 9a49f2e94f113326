//! Head checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "RSAC" u32 version
//! u32 input_dim
//! u32 n_trunk, n_trunk * u32
//! u32 n_head,  n_head  * u32
//! f32 leaky_slope
//! u64 seed, u32 epochs_completed
//! u64 param_count, param_count * f32
//! ```
//!
//! Parameters are flattened trunk, scale head, shift head; weight then bias
//! per layer.

use std::path::Path;

use crate::error::{Error, Result};
use crate::head::{MlpConfig, MlpParameters};
use crate::io::binary::LeReader;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RSAC";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: MlpConfig,
    pub params: MlpParameters<f32>,
    pub seed: u64,
    pub epochs_completed: u32,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.config.validate()?;
        if !self.params.matches_config(&self.config) {
            return Err(Error::InvalidParameter(
                "checkpoint parameters do not match config".into(),
            ));
        }
        let c = &self.config;
        let mut out = Vec::new();
        let u32le = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        u32le(&mut out, c.input_dim);
        u32le(&mut out, c.trunk_dims.len());
        for &d in &c.trunk_dims {
            u32le(&mut out, d);
        }
        u32le(&mut out, c.head_dims.len());
        for &d in &c.head_dims {
            u32le(&mut out, d);
        }
        out.extend_from_slice(&c.leaky_slope.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.epochs_completed.to_le_bytes());
        let flat = self.params.flatten();
        out.extend_from_slice(&(flat.len() as u64).to_le_bytes());
        for v in flat {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut r = LeReader::new(path, bytes);
        r.magic(CHECKPOINT_MAGIC)?;
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::UnsupportedVersion {
                path: path.into(),
                found: version,
                supported: CHECKPOINT_VERSION,
            });
        }
        let input_dim = r.u32()? as usize;
        let dims = |r: &mut LeReader<'_>| -> Result<Vec<usize>> {
            let at = r.pos();
            let n = r.u32()? as usize;
            if n > 64 {
                return Err(r.error(at, format!("implausible layer count {n}")));
            }
            (0..n).map(|_| r.u32().map(|d| d as usize)).collect()
        };
        let trunk_dims = dims(&mut r)?;
        let head_dims = dims(&mut r)?;
        let leaky_slope = r.f32()?;
        let config = MlpConfig {
            input_dim,
            trunk_dims,
            head_dims,
            leaky_slope,
        };
        config
            .validate()
            .map_err(|e| r.error(8, format!("invalid head config: {e}")))?;
        let seed = r.u64()?;
        let epochs_completed = r.u32()?;
        let count_at = r.pos();
        let count = r.u64()?;
        if count != config.param_count() as u64 {
            return Err(r.error(
                count_at,
                format!(
                    "parameter count {count} does not match config ({})",
                    config.param_count()
                ),
            ));
        }
        let flat = r.finite_f32s(count as usize)?;
        r.finish()?;
        let params = MlpParameters::from_flat(&config, &flat)?;
        Ok(Self {
            config,
            params,
            seed,
            epochs_completed,
        })
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, ckpt: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ckpt.to_bytes()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(path, &bytes)
}
