//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by configuration, signal processing and experiment I/O.
#[derive(Debug, Error)]
pub enum SimError {
    /// A parameter is outside its allowed domain.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    /// A sample stream does not line up with the expected symbol framing.
    #[error("framing error: {0}")]
    Framing(String),
    /// An experiment spec file failed to parse or validate.
    #[error("spec error: {0}")]
    SpecFile(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
