//! Flat embedding store: `"RSAE"`, u32 version, u32 dim, u32 count, then
//! `count * dim` little-endian f32, row-major.

use std::path::Path;

use crate::error::{Error, Result};
use crate::head::TextEmbedding;
use crate::io::binary::LeReader;

pub const EMBEDDING_MAGIC: &[u8; 4] = b"RSAE";
pub const EMBEDDING_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, rows: &[Vec<f32>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dim must be >= 1".into()));
        }
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "embedding row {i} has dim {}, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, index: usize) -> Option<&[f32]> {
        self.data.get(index * self.dim..(index + 1) * self.dim)
    }

    pub fn embedding(&self, index: usize) -> Result<TextEmbedding> {
        let row = self.row(index).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "embedding index {index} out of range (store has {})",
                self.len()
            ))
        })?;
        TextEmbedding::new(row.to_vec())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(EMBEDDING_MAGIC);
        out.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Self> {
        let mut r = LeReader::new(path, bytes);
        r.magic(EMBEDDING_MAGIC)?;
        let version = r.u32()?;
        if version != EMBEDDING_VERSION {
            return Err(Error::UnsupportedVersion {
                path: path.into(),
                found: version,
                supported: EMBEDDING_VERSION,
            });
        }
        let dim = r.u32()? as usize;
        let count = r.u32()? as usize;
        if dim == 0 {
            return Err(r.error(8, "embedding dim must be >= 1"));
        }
        let expected = HEADER_LEN as u64 + 4 * dim as u64 * count as u64;
        if bytes.len() as u64 != expected {
            return Err(Error::Truncated {
                path: path.into(),
                expected,
                actual: bytes.len() as u64,
            });
        }
        let data = r.finite_f32s(dim * count)?;
        r.finish()?;
        Ok(Self { dim, data })
    }
}

pub fn embedding_store_read(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::from_bytes(path, &bytes)
}

pub fn embedding_store_write(path: impl AsRef<Path>, store: &EmbeddingStore) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, store.to_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("e.rsae")
    }

    #[test]
    fn two_rows_of_four() {
        let rows = vec![vec![0.0, 1.0, -2.5, 3.25], vec![1e-7, -1e7, 0.5, 42.0]];
        let s = EmbeddingStore::new(4, &rows).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"RSAE");
        assert_eq!(bytes.len(), 16 + 32);
        let back = EmbeddingStore::from_bytes(p(), &bytes).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.row(0).unwrap(), rows[0].as_slice());
        assert_eq!(back.row(1).unwrap(), rows[1].as_slice());
        assert_eq!(back.embedding(1).unwrap().values(), rows[1].as_slice());
        assert!(back.embedding(2).is_err());
    }

    #[test]
    fn empty_store_is_valid() {
        let s = EmbeddingStore::new(8, &[]).unwrap();
        let back = EmbeddingStore::from_bytes(p(), &s.to_bytes()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 8);
    }

    #[test]
    fn truncated_reports_sizes() {
        let s = EmbeddingStore::new(4, &[vec![1.0; 4], vec![2.0; 4]]).unwrap();
        let bytes = s.to_bytes();
        let err = EmbeddingStore::from_bytes(p(), &bytes[..bytes.len() - 3]).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Truncated {
                    expected: 48,
                    actual: 45,
                    ..
                }
            ),
            "{err}"
        );
        assert!(err.to_string().contains("expected 48 bytes, found 45"));
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = EmbeddingStore::new(2, &[vec![1.0, 2.0]]).unwrap().to_bytes();
        bytes[4] = 9;
        assert!(matches!(
            EmbeddingStore::from_bytes(p(), &bytes),
            Err(Error::UnsupportedVersion { found: 9, .. })
        ));
        bytes[0] = b'X';
        assert!(matches!(
            EmbeddingStore::from_bytes(p(), &bytes),
            Err(Error::Format { .. })
        ));
    }
}
