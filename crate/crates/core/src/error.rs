use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the beamforming library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or configuration value violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical step failed (non-finite values, loss of positive definiteness).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The scenario configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
