//! Error type shared across the crate.
//!
//! The variants are coarse on purpose: they distinguish the classes a caller
//! can react to (bad configuration, bad data, a failed matrix factorization,
//! a numerical breakdown mid-chain, I/O), and the message carries the
//! specifics such as the offending line, coordinate, or pivot.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration file or option was malformed (unknown key, bad value,
    /// inconsistent settings).
    #[error("config error: {0}")]
    Config(String),

    /// A data file failed validation. `line` is the 1-based line number in
    /// the source file when one is known.
    #[error("data error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Ingest {
        /// 1-based line number in the input file, when known.
        line: Option<usize>,
        /// What went wrong.
        message: String,
    },

    /// An argument violated a routine's preconditions (dimension mismatch,
    /// non-positive scale, empty input, out-of-range probability level, ...).
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A matrix factorization (Cholesky or LU) broke down. `index` is the
    /// 0-based pivot at which it failed.
    #[error("factorization failed at pivot {index}: {message}")]
    Factorization {
        /// 0-based pivot index where the factorization stopped.
        index: usize,
        /// What went wrong.
        message: String,
    },

    /// A sampler or estimator produced a non-finite value or otherwise
    /// diverged.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An underlying I/O operation failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand for [`Error::Invalid`] from anything stringy.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Shorthand for [`Error::Config`].
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Shorthand for an ingest error with a line number.
    pub fn ingest_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Ingest { line: Some(line), message: msg.into() }
    }

    /// Shorthand for an ingest error without a line number.
    pub fn ingest(msg: impl Into<String>) -> Self {
        Error::Ingest { line: None, message: msg.into() }
    }
}
