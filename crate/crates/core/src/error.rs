use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver, the diagnostics and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("grid mismatch: {left} vs {right} points per dimension")]
    GridMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot invert vorticity: {0}")]
    Inversion(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("blow-up detected at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("operation requires variant {expected}, got {got}")]
    WrongVariant { expected: &'static str, got: &'static str },

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
