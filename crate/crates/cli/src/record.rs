//! Run records: the effective configuration plus digests of every input, so
//! a run can be checked for reproducibility later.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use depthscale::io::DatasetManifest;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunRecord<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub inputs: Vec<InputDigest>,
}

impl<C: Serialize> RunRecord<C> {
    pub fn new(command: &'static str, config: C) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            inputs: Vec::new(),
        }
    }

    pub fn input(&mut self, role: &'static str, path: &Path, sha256: String) {
        self.inputs.push(InputDigest {
            role,
            path: path.to_path_buf(),
            sha256,
        });
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::config(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digest over `name\0sha256\n` lines, sorted by name.
pub fn sha256_listing<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut sorted: Vec<_> = entries.into_iter().collect();
    sorted.sort();
    let mut h = Sha256::new();
    for (name, digest) in sorted {
        h.update(name.as_bytes());
        h.update([0]);
        h.update(digest.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Digest of a manifest file together with every file it references, keyed
/// by the paths as written in the manifest.
pub fn sha256_manifest_tree(path: &Path, manifest: &DatasetManifest) -> CliResult<String> {
    let mut refs = BTreeSet::new();
    for r in &manifest.records {
        refs.insert(r.rel_depth.clone());
        refs.insert(r.gt_depth.clone());
        for e in &r.embeddings {
            refs.insert(e.path.clone());
        }
    }
    let mut lines = vec![("<manifest>".to_string(), sha256_file(path)?)];
    for p in refs {
        let resolved = manifest.resolve(&p);
        // ground truth may legitimately be absent for prediction-only manifests
        let digest = if resolved.exists() {
            sha256_file(&resolved)?
        } else {
            "missing".to_string()
        };
        lines.push((p.to_string_lossy().into_owned(), digest));
    }
    Ok(sha256_listing(lines.iter().map(|(a, b)| (a.as_str(), b.as_str()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_order_independent() {
        let a = sha256_listing([("x", "1"), ("y", "2")]);
        let b = sha256_listing([("y", "2"), ("x", "1")]);
        assert_eq!(a, b);
        assert_ne!(a, sha256_listing([("x", "2"), ("y", "1")]));
        assert_eq!(a.len(), 64);
    }
}
