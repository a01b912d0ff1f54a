use std::path::PathBuf;

/// Errors produced by sequence construction, mean evaluation, and the
/// classification pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("index {index} out of range 1..={len} for `{label}`")]
    IndexRange { label: String, index: u64, len: u64 },

    #[error("breakpoint overflow at r={r} for `{label}`")]
    BreakpointOverflow { label: String, r: u32 },

    #[error("`{label}` is undefined at index {index} (value {value})")]
    Domain { label: String, index: u64, value: f64 },

    #[error(
        "series over `{label}` truncated at {terms} terms: achieved tail bound {achieved:e}, requested {requested:e}"
    )]
    Truncation {
        label: String,
        terms: u64,
        achieved: f64,
        requested: f64,
    },

    #[error("construction failed at j={j}: {reason}")]
    Construction { j: u32, reason: String },

    #[error("buffer of {needed} values exceeds cap of {cap}")]
    MemoryCap { needed: u64, cap: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    FileFormat {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error category, used by front ends to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad identifiers, parameters, or input files: the request itself is wrong.
    Input,
    /// The request was well-formed but evaluation could not complete.
    Runtime,
    /// The environment failed underneath us.
    Io,
}

impl Error {
    pub fn parameter(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::UnknownIdentifier(_)
            | Error::Parameter { .. }
            | Error::Validation(_)
            | Error::FileFormat { .. } => ErrorCategory::Input,
            Error::IndexRange { .. }
            | Error::BreakpointOverflow { .. }
            | Error::Domain { .. }
            | Error::Truncation { .. }
            | Error::Construction { .. }
            | Error::MemoryCap { .. } => ErrorCategory::Runtime,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }
}
