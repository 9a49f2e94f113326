use std::path::PathBuf;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions {height}x{width}: {reason}")]
    Dimensions {
        height: usize,
        width: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {what} is {got_h}x{got_w}, expected {want_h}x{want_w}")]
    ShapeMismatch {
        what: &'static str,
        got_h: usize,
        got_w: usize,
        want_h: usize,
        want_w: usize,
    },

    #[error("non-finite value {value} at (row {row}, col {col})")]
    NonFinite { row: usize, col: usize, value: f32 },

    #[error("{what}: value {value} at (row {row}, col {col}) is out of domain")]
    OutOfDomain {
        what: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty validity mask: {0}")]
    EmptyMask(&'static str),

    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    #[error("singular least-squares system for image '{image_id}' (det {det:e})")]
    SingularFit { image_id: String, det: f64 },

    #[error("non-finite activation at {stage} layer {layer}")]
    NonFiniteActivation { stage: &'static str, layer: usize },

    #[error("non-finite gradient; optimizer step refused")]
    NonFiniteGradient,

    #[error("global fit diverged at iteration {iteration}; last finite iterate alpha={alpha}, beta={beta}")]
    Diverged { iteration: usize, alpha: f64, beta: f64 },

    #[error("non-finite training loss at epoch {epoch}, iteration {iteration}")]
    NonFiniteLoss { epoch: usize, iteration: usize },

    #[error("{0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed input at byte {offset}: {reason}")]
    Format { path: PathBuf, offset: u64, reason: String },

    #[error("{path}: unsupported version {found} (supported: {supported})")]
    UnsupportedVersion { path: PathBuf, found: u32, supported: u32 },

    #[error("{path}: expected {expected} bytes, found {actual}")]
    Truncated { path: PathBuf, expected: u64, actual: u64 },

    #[error("manifest {path} line {line}: {reason}")]
    Manifest { path: PathBuf, line: usize, reason: String },

    #[error("sample '{image_id}': {source}")]
    Sample {
        image_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Dimensions { .. }
            | Error::ShapeMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::Empty(_)
            | Error::Manifest { .. } => ErrorCategory::Config,
            Error::Io { .. } | Error::Format { .. } | Error::UnsupportedVersion { .. } | Error::Truncated { .. } => {
                ErrorCategory::Io
            }
            Error::NonFinite { .. }
            | Error::OutOfDomain { .. }
            | Error::EmptyMask(_)
            | Error::DegenerateScale(_)
            | Error::SingularFit { .. }
            | Error::NonFiniteActivation { .. }
            | Error::NonFiniteGradient
            | Error::Diverged { .. }
            | Error::NonFiniteLoss { .. } => ErrorCategory::Numeric,
            Error::Sample { source, .. } => source.category(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            offset,
            reason: reason.into(),
        }
    }

    pub(crate) fn in_sample(self, image_id: &str) -> Self {
        Error::Sample {
            image_id: image_id.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
