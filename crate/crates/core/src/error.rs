//! Error type shared across the library.

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by data loading, model training and optimization.
#[derive(Debug)]
pub enum Error {
    /// File could not be opened or read.
    Io { path: PathBuf, source: io::Error },
    /// CSV structure or cell content problem; `detail` names the row/column.
    Parse { path: PathBuf, detail: String },
    /// A structural invariant on the data is violated (size mismatch, empty
    /// input, missing LOC, ...).
    InvalidData(String),
    /// A hyperparameter is outside its allowed range or unknown.
    InvalidParam(String),
    /// A preprocessor/learner/goal was applied to the wrong kind of task.
    Incompatible(String),
    /// Document-frequency filtering removed every token.
    EmptyVocabulary,
    /// A row has the wrong number of features for a fitted object.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "io error on {}: {}", path.display(), source),
            Error::Parse { path, detail } => {
                write!(f, "parse error in {}: {}", path.display(), detail)
            }
            Error::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Incompatible(msg) => write!(f, "incompatible: {msg}"),
            Error::EmptyVocabulary => write!(f, "vocabulary is empty after filtering"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected} features, got {got}")
            }
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
