use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OwlError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Csv(String),

    #[error("empty dataset: {0}")]
    Empty(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("screening safety violation: coordinate {index} is inactive but has value {value}")]
    Safety { index: usize, value: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("{0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, OwlError>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(OwlError::Dimension {
            what,
            expected,
            got,
        })
    }
}
