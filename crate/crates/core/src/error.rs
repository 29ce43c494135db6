//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid parameter value.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The angular-spectrum detector returned an empty peak list.
    #[error("no paths detected in the angular spectrum")]
    NoPathsDetected,

    /// A decision-directed trial produced non-finite state and was aborted.
    #[error("frame decode aborted: {0}")]
    DecodeAbort(String),

    /// FNN training diverged or failed.
    #[error("training failed: {0}")]
    Training(String),

    /// Malformed or unreadable model file.
    #[error("model file error: {0}")]
    Model(String),

    /// Configuration file problem.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
