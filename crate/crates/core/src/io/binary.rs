use std::path::Path;

use crate::error::{Error, Result};

/// Little-endian reader over an in-memory file that reports byte offsets.
pub(crate) struct LeReader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> LeReader<'a> {
    pub fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self { path, bytes, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Truncated {
                path: self.path.into(),
                expected: (self.pos + n) as u64,
                actual: self.bytes.len() as u64,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != want {
            return Err(Error::format(
                self.path,
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(want)
                ),
            ));
        }
        Ok(())
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// `n` floats, rejecting non-finite values with their offset.
    pub fn finite_f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let start = self.pos;
        let raw = self.take(n.checked_mul(4).ok_or_else(|| self.error(start, "length overflow"))?)?;
        raw.chunks_exact(4)
            .enumerate()
            .map(|(i, b)| {
                let v = f32::from_le_bytes(b.try_into().unwrap());
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(self.error(start + 4 * i, "non-finite float"))
                }
            })
            .collect()
    }

    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(self.error(self.pos, format!("{} unexpected trailing bytes", self.remaining())));
        }
        Ok(())
    }

    pub fn error(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::format(self.path, offset as u64, reason)
    }
}
