//! 16-bit single-channel PNG depth, `depth_m = raw / divisor`, raw 0 = invalid.

use std::io::{BufWriter, Cursor};
use std::path::Path;

use crate::depth::{DepthMap, ValidityMask};
use crate::error::{Error, Result};

/// KITTI encoding.
pub const KITTI_DIVISOR: f64 = 256.0;
/// NYU-style millimeter encoding.
pub const NYU_DIVISOR: f64 = 1000.0;

pub fn read_depth_png16(path: impl AsRef<Path>, divisor: f64) -> Result<(DepthMap, ValidityMask)> {
    let path = path.as_ref();
    check_divisor(divisor)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_depth_png16(path, &bytes, divisor)
}

pub fn decode_depth_png16(path: &Path, bytes: &[u8], divisor: f64) -> Result<(DepthMap, ValidityMask)> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, 0, format!("png header: {e}")))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    if info.bit_depth != png::BitDepth::Sixteen || info.color_type != png::ColorType::Grayscale {
        return Err(Error::format(
            path,
            0,
            format!(
                "expected 16-bit single-channel png, found {:?} {:?}",
                info.bit_depth, info.color_type
            ),
        ));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, 0, "png image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, bytes.len() as u64, format!("png data: {e}")))?;
    let line = frame.line_size;
    let mut values = Vec::with_capacity(width * height);
    let mut bits = Vec::with_capacity(width * height);
    for r in 0..height {
        let row = &buf[r * line..r * line + 2 * width];
        for px in row.chunks_exact(2) {
            let raw = u16::from_be_bytes([px[0], px[1]]);
            values.push((raw as f64 / divisor) as f32);
            bits.push(raw != 0);
        }
    }
    Ok((
        DepthMap::new(height, width, values)?,
        ValidityMask::new(height, width, bits)?,
    ))
}

/// Raw code for one depth value: `round(depth * divisor)` saturated to `u16`,
/// 0 for invalid or nonpositive depth.
pub fn encode_depth(depth: f32, valid: bool, divisor: f64) -> u16 {
    if !valid || depth <= 0.0 {
        return 0;
    }
    (depth as f64 * divisor).round().clamp(0.0, u16::MAX as f64) as u16
}

pub fn encode_depth_png16(depth: &DepthMap, mask: Option<&ValidityMask>, divisor: f64) -> Result<Vec<u8>> {
    check_divisor(divisor)?;
    if let Some(m) = mask {
        depth.same_shape(m, "mask")?;
    }
    let mut data = Vec::with_capacity(depth.len() * 2);
    for (i, &d) in depth.values().iter().enumerate() {
        let valid = mask.is_none_or(|m| m.bits()[i]);
        data.extend_from_slice(&encode_depth(d, valid, divisor).to_be_bytes());
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(BufWriter::new(&mut out), depth.width() as u32, depth.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut w = enc
            .write_header()
            .map_err(|e| Error::InvalidParameter(format!("png encode: {e}")))?;
        w.write_image_data(&data)
            .map_err(|e| Error::InvalidParameter(format!("png encode: {e}")))?;
        w.finish()
            .map_err(|e| Error::InvalidParameter(format!("png encode: {e}")))?;
    }
    Ok(out)
}

pub fn write_depth_png16(
    path: impl AsRef<Path>,
    depth: &DepthMap,
    mask: Option<&ValidityMask>,
    divisor: f64,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_depth_png16(depth, mask, divisor)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn check_divisor(divisor: f64) -> Result<()> {
    if divisor > 0.0 && divisor.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "png depth divisor must be > 0, got {divisor}"
        )))
    }
}
