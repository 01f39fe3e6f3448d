use std::fmt;
use std::path::PathBuf;

/// Errors produced by the segmentation pipeline.
#[derive(Debug)]
pub enum Error {
    /// File could not be read or written.
    Io { path: PathBuf, source: std::io::Error },
    /// File exists but is not in a supported format (or is corrupt).
    Format { path: PathBuf, detail: String },
    /// Inputs that must share a shape do not.
    Mismatch(String),
    /// A parameter or input violates its contract.
    InvalidInput(String),
    /// Paired t-test differences have zero variance.
    ZeroVariance,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::Format { path, detail } => write!(f, "{}: {}", path.display(), detail),
            Error::Mismatch(msg) => write!(f, "dimension mismatch: {}", msg),
            Error::InvalidInput(msg) => write!(f, "invalid input: {}", msg),
            Error::ZeroVariance => write!(f, "paired differences have zero variance"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
