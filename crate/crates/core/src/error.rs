//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid physical input (bad quantum numbers, forbidden transition,
    /// violated invariant of a domain type).
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve or integration failed beyond tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Configuration file or CLI input could not be validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI: 1 for config/domain errors, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Io(_) => 1,
            Error::Numerical(_) => 2,
        }
    }
}
