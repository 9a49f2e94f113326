//! Depth maps, validity masks and the global inverse-depth alignment
//! `depth = 1 / (alpha * inv_rel + beta)`.
//!
//! A [`DepthMap`] never stores NaN or infinities. Pixels without usable data
//! are described by a companion [`ValidityMask`].

use crate::error::{Error, Result};

/// Dense row-major depth grid (meters, or unitless inverse depth for relative maps).
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl DepthMap {
    pub fn new(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if values.len() != height * width {
            return Err(Error::Dimensions {
                height,
                width,
                reason: "value count does not match height*width",
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / width,
                col: i % width,
                value: values[i],
            });
        }
        Ok(Self { height, width, values })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    /// Single-row map, handy for small hand-built cases.
    pub fn from_row(values: &[f32]) -> Result<Self> {
        Self::new(1, values.len(), values.to_vec())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.width + col]
    }

    pub fn coord(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    pub fn same_shape<T: Shaped>(&self, other: &T, what: &'static str) -> Result<()> {
        ensure_same_shape(self, other, what)
    }

    /// Applies `f` pixel-wise, re-validating finiteness of the result.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<Self> {
        Self::new(self.height, self.width, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Values at the set bits of `mask`, in row-major order.
    pub fn masked_values(&self, mask: &ValidityMask) -> Result<Vec<f32>> {
        self.same_shape(mask, "mask")?;
        Ok(self
            .values
            .iter()
            .zip(mask.bits())
            .filter(|(_, &b)| b)
            .map(|(&v, _)| v)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl ValidityMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(height, width)?;
        if bits.len() != height * width {
            return Err(Error::Dimensions {
                height,
                width,
                reason: "mask length does not match height*width",
            });
        }
        Ok(Self { height, width, bits })
    }

    pub fn full(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![true; height * width])
    }

    pub fn from_row(bits: &[bool]) -> Result<Self> {
        Self::new(1, bits.len(), bits.to_vec())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of valid pixels, |M|.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn and(&self, other: &ValidityMask) -> Result<Self> {
        ensure_same_shape(self, other, "mask")?;
        Ok(Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect(),
        })
    }

    /// Clears every bit outside the rectangle `[top, top+height) x [left, left+width)`.
    pub fn restrict_to(&self, crop: &Crop) -> Self {
        let mut bits = self.bits.clone();
        for (i, b) in bits.iter_mut().enumerate() {
            let (r, c) = (i / self.width, i % self.width);
            if !crop.contains(r, c) {
                *b = false;
            }
        }
        Self {
            height: self.height,
            width: self.width,
            bits,
        }
    }
}

/// Rectangular evaluation window in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Crop {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Crop {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.top && row < self.top + self.height && col >= self.left && col < self.left + self.width
    }
}

pub trait Shaped {
    fn shape(&self) -> (usize, usize);
}

impl Shaped for DepthMap {
    fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

impl Shaped for ValidityMask {
    fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

pub(crate) fn ensure_same_shape<A: Shaped, B: Shaped>(a: &A, b: &B, what: &'static str) -> Result<()> {
    let (want_h, want_w) = a.shape();
    let (got_h, got_w) = b.shape();
    if (want_h, want_w) != (got_h, got_w) {
        return Err(Error::ShapeMismatch {
            what,
            got_h,
            got_w,
            want_h,
            want_w,
        });
    }
    Ok(())
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Dimensions {
            height,
            width,
            reason: "height and width must be at least 1",
        });
    }
    Ok(())
}

/// Global alignment parameters. `alpha` scales inverse relative depth,
/// `beta` is an inverse-meter offset. Both are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScaleShift {
    pub alpha: f64,
    pub beta: f64,
}

impl ScaleShift {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and > 0, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Metric depth for a single inverse relative value.
    #[inline]
    pub fn depth_of(&self, inv_rel: f64) -> f64 {
        1.0 / (self.alpha * inv_rel + self.beta)
    }
}

/// Closed evaluation interval in meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DepthRange {
    pub min_m: f64,
    pub max_m: f64,
}

impl DepthRange {
    pub const NYU: DepthRange = DepthRange {
        min_m: 1e-3,
        max_m: 10.0,
    };
    pub const KITTI: DepthRange = DepthRange {
        min_m: 1e-3,
        max_m: 80.0,
    };
    pub const VOID: DepthRange = DepthRange { min_m: 0.2, max_m: 5.0 };

    pub fn new(min_m: f64, max_m: f64) -> Result<Self> {
        if !(min_m.is_finite() && max_m.is_finite() && 0.0 <= min_m && min_m < max_m) {
            return Err(Error::InvalidParameter(format!(
                "depth range requires 0 <= min < max, got [{min_m}, {max_m}]"
            )));
        }
        Ok(Self { min_m, max_m })
    }

    pub fn contains(&self, d: f64) -> bool {
        self.min_m <= d && d <= self.max_m
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nyu" | "nyuv2" => Some(Self::NYU),
            "kitti" => Some(Self::KITTI),
            "void" => Some(Self::VOID),
            _ => None,
        }
    }
}

/// `1 / (alpha * y + beta)` per pixel. `y` must be nonnegative.
pub fn apply_alignment(inv_rel: &DepthMap, params: ScaleShift) -> Result<DepthMap> {
    let params = ScaleShift::new(params.alpha, params.beta)?;
    let mut out = Vec::with_capacity(inv_rel.len());
    for (i, &y) in inv_rel.values().iter().enumerate() {
        if y < 0.0 {
            let (row, col) = inv_rel.coord(i);
            return Err(Error::OutOfDomain {
                what: "inverse relative depth must be >= 0",
                row,
                col,
                value: y as f64,
            });
        }
        out.push(params.depth_of(y as f64) as f32);
    }
    DepthMap::new(inv_rel.height(), inv_rel.width(), out)
}

/// `1 / max(d, eps)` per pixel.
pub fn invert(depth: &DepthMap, eps: f32) -> Result<DepthMap> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    for (i, &d) in depth.values().iter().enumerate() {
        if d < 0.0 {
            let (row, col) = depth.coord(i);
            return Err(Error::OutOfDomain {
                what: "depth must be >= 0",
                row,
                col,
                value: d as f64,
            });
        }
    }
    depth.map(|d| 1.0 / d.max(eps))
}

pub fn clamp_to_range(depth: &DepthMap, range: DepthRange) -> Result<DepthMap> {
    let (lo, hi) = (range.min_m as f32, range.max_m as f32);
    depth.map(|d| d.clamp(lo, hi))
}

/// Valid iff `gt > 0` and `gt` lies in the closed range.
pub fn mask_from_ground_truth(gt: &DepthMap, range: DepthRange) -> ValidityMask {
    let bits = gt
        .values()
        .iter()
        .map(|&d| d > 0.0 && range.contains(d as f64))
        .collect();
    ValidityMask {
        height: gt.height(),
        width: gt.width(),
        bits,
    }
}
