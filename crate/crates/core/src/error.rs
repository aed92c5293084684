//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// The CLI maps these onto exit-code classes: anything user-correctable
/// (input, config, schema, parse, shape, version) is a validation failure,
/// I/O failures form their own class, and [`Error::Internal`] flags bugs.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a documented precondition (NaN RMSD, label out of range, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is outside its legal domain.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Vector or matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Structured data broke a schema rule (duplicate key, unknown algorithm, ...).
    #[error("schema violation: {0}")]
    Schema(String),

    /// A file could not be parsed; `line` is 1-based and includes the header.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    /// Persisted artifact carries a schema version this build does not understand.
    #[error("unsupported schema version {found}, this build reads version {expected}")]
    Version { expected: u32, found: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Invariant breakage inside the library itself.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn parse(path: impl Into<String>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
