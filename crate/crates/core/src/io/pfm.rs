//! Grayscale portable float map ("Pf"). A negative scale marks little-endian
//! data; rows are stored bottom to top.

use std::path::Path;

use crate::depth::DepthMap;
use crate::error::{Error, Result};

pub fn read_pfm(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(path, &bytes)
}

pub fn write_pfm(path: impl AsRef<Path>, map: &DepthMap) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pfm(map)).map_err(|e| Error::io(path, e))
}

/// Little-endian encoding with scale `-1`.
pub fn encode_pfm(map: &DepthMap) -> Vec<u8> {
    let header = format!("Pf\n{} {}\n-1\n", map.width(), map.height());
    let mut out = Vec::with_capacity(header.len() + map.len() * 4);
    out.extend_from_slice(header.as_bytes());
    for row in map.values().chunks_exact(map.width()).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Header {
    width: usize,
    height: usize,
    little_endian: bool,
    data_offset: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<(usize, String)> {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::format(path, start as u64, "unexpected end of header"));
        }
        Ok((start, String::from_utf8_lossy(&bytes[start..*pos]).into_owned()))
    };
    let (at, magic) = token(&mut pos)?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => {
            return Err(Error::format(
                path,
                at as u64,
                "color PFM (PF) is not supported; expected Pf",
            ))
        }
        other => return Err(Error::format(path, at as u64, format!("bad magic '{other}'"))),
    }
    let dim = |pos: &mut usize, what: &str| -> Result<usize> {
        let (at, t) = token(pos)?;
        t.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::format(path, at as u64, format!("invalid {what} '{t}'")))
    };
    let width = dim(&mut pos, "width")?;
    let height = dim(&mut pos, "height")?;
    let (at, t) = token(&mut pos)?;
    let scale: f64 = t
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::format(path, at as u64, format!("invalid scale '{t}'")))?;
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format(path, pos as u64, "missing separator after scale"));
    }
    Ok(Header {
        width,
        height,
        little_endian: scale < 0.0,
        data_offset: pos + 1,
    })
}

pub fn decode_pfm(path: &Path, bytes: &[u8]) -> Result<DepthMap> {
    let h = parse_header(path, bytes)?;
    let expected = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(path, 0, "image dimensions overflow"))?;
    let payload = &bytes[h.data_offset..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            path: path.into(),
            expected: (h.data_offset + expected) as u64,
            actual: bytes.len() as u64,
        });
    }
    if payload.len() > expected {
        return Err(Error::format(
            path,
            (h.data_offset + expected) as u64,
            format!("{} trailing bytes after payload", payload.len() - expected),
        ));
    }
    let mut values = vec![0f32; h.width * h.height];
    for (file_row, chunk) in payload.chunks_exact(h.width * 4).enumerate() {
        let r = h.height - 1 - file_row;
        for (c, px) in chunk.chunks_exact(4).enumerate() {
            let b = [px[0], px[1], px[2], px[3]];
            let v = if h.little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
            if !v.is_finite() {
                let offset = h.data_offset + file_row * h.width * 4 + c * 4;
                return Err(Error::format(
                    path,
                    offset as u64,
                    format!("non-finite value at (row {r}, col {c})"),
                ));
            }
            values[r * h.width + c] = v;
        }
    }
    DepthMap::new(h.height, h.width, values)
}
