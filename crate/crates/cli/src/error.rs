use std::fmt;

use depthscale::ErrorCategory;

#[derive(Debug)]
pub struct CliError {
    pub category: ErrorCategory,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            category: ErrorCategory::Config,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self {
            category: ErrorCategory::Io,
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn context(self, prefix: impl fmt::Display) -> Self {
        Self {
            category: self.category,
            message: format!("{prefix}: {}", self.message),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category {
            ErrorCategory::Config => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Numeric => 4,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.category {
            ErrorCategory::Config => "config",
            ErrorCategory::Io => "io",
            ErrorCategory::Numeric => "numeric",
        }
    }
}

impl From<depthscale::Error> for CliError {
    fn from(e: depthscale::Error) -> Self {
        Self {
            category: e.category(),
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.label(), self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
