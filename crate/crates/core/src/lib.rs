//! Relative-to-metric monocular depth alignment.
//!
//! A relative depth network predicts inverse depth `y` up to an unknown
//! global affine transform. This crate recovers metric depth as
//! `1 / (alpha * y + beta)`, with `(alpha, beta)` either fit against ground
//! truth ([`baselines`]) or predicted from a caption embedding by a small MLP
//! ([`head`]). [`metrics`] scores the result; [`io`] and [`synth`] cover file
//! formats and desk-scale synthetic data.

pub mod baselines;
pub mod depth;
pub mod error;
pub mod head;
pub mod io;
pub mod metrics;
pub mod synth;

pub use depth::{
    apply_alignment, clamp_to_range, invert, mask_from_ground_truth, Crop, DepthMap, DepthRange, ScaleShift,
    ValidityMask,
};
pub use error::{Error, ErrorCategory, Result};
