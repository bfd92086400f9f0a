use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row or line in an input file could not be parsed.
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },

    /// Input parsed but violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller broke a precondition of an operation.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("exact closed testing refused for m = {m} (cap {cap}); use the Simes shortcut for large studies")]
    CapExceeded { m: usize, cap: usize },

    #[error("dualization stopped after exceeding {cap} intermediate transversals")]
    TooManyTransversals { cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown hypothesis label `{0}`")]
    UnknownLabel(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an I/O failure together with the path involved.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
