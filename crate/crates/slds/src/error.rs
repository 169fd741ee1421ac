//! Error type shared by the whole crate.
//!
//! Errors fall into three categories that downstream tools (notably the CLI)
//! map onto distinct exit codes: configuration errors (invalid parameters,
//! exit code 2), data errors (invalid sample values or incompatible inputs,
//! exit code 3), and format errors (malformed summary files, exit code 3).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Error cases raised by sketches, summaries, estimators, and codecs.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented precondition.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data was invalid or incompatible with the requested operation.
    #[error("data error: {0}")]
    Data(String),
    /// A serialized summary could not be decoded.
    #[error("format error: {0}")]
    Format(String),
    /// An underlying I/O operation failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Builds a configuration error from anything displayable.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Builds a data error from anything displayable.
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Builds a format error from anything displayable.
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Process exit code conventionally associated with this error.
    ///
    /// Configuration problems exit with 2; data, format, and I/O problems
    /// exit with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::Format(_) | Error::Io(_) => 3,
        }
    }
}
