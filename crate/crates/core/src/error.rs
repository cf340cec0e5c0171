use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum GamaError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid decomposition level {level} for signal of length {steps}: need level >= 1 and length >= 2^level")]
    LevelTooDeep { level: usize, steps: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("AUC is undefined: input contains only one class")]
    SingleClass,

    #[error("RelaImpr base AUC must exceed 0.5, got {0}")]
    BaseAuc(f64),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("malformed CSV header in {path}: expected `{expected}`, found `{found}`")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GamaError>;
