//! Configuration-driven Monte Carlo harness around the `ucmvdr` library:
//! experiment configs, the trial runner, and the CSV/JSON artifact writers
//! behind the `ucmvdr` command-line tool.

pub mod config;
pub mod output;
pub mod runner;

use std::path::PathBuf;

/// Errors from the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] ucmvdr::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
