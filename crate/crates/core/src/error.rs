use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("corpus has no gold chains")]
    MissingGold,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mention universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("problem too large for exact enumeration: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
