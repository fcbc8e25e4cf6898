use thiserror::Error;

use crate::space::NormMode;

#[derive(Debug, Error)]
pub enum GeimError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// No dictionary element sees the current residual: the active
    /// functionals are not unisolvent on the span of the snapshots.
    #[error("greedy step {step}: every functional vanishes on the residual")]
    Unisolvence { step: usize },

    #[error("rank-deficient basis ({0})")]
    RankDeficient(String),

    #[error("operation not supported in {0:?} mode")]
    UnsupportedMode(NormMode),

    #[error("singular cross-Gramian at n = {0}: interpolation is ill-posed")]
    IllPosed(usize),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("index {index} out of range (available {available})")]
    OutOfRange { index: usize, available: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, GeimError>;
