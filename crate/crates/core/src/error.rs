use thiserror::Error;

/// Errors raised across the pipeline. The variant decides the CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller combined values that do not belong together.
    #[error("usage error: {0}")]
    Usage(String),
    /// An argument outside the operation's domain (zero inverse, equal points, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A form or descriptor that does not yield a usable polar space.
    #[error("configuration error: {0}")]
    Config(String),
    /// A horizon the pipeline declines to work with.
    #[error("horizon refused: {0}")]
    Refusal(String),
    /// A structural guarantee failed to hold on computed data.
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Refusal(_) => 3,
            _ => 1,
        }
    }
}
