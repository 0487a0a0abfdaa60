//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid hyperparameters or network construction arguments.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input vector, dimension mismatch, or bad example data.
    #[error("input error: {0}")]
    Input(String),

    /// Failed to parse an IDX dataset file.
    #[error("ingestion error at byte {offset} in {path}: {message}")]
    Ingestion {
        path: String,
        offset: u64,
        message: String,
    },

    /// Statistics precondition violated (e.g. too few samples).
    #[error("statistics error: {0}")]
    Stats(String),

    /// Model or config file could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
