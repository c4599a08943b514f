//! Error type shared by the solvers, generators and the I/O layer.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("entry ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("symmetric matrix has mismatched pair at ({row}, {col}): {value} vs {mirror}")]
    AsymmetricPair {
        row: usize,
        col: usize,
        value: f64,
        mirror: f64,
    },

    #[error("operation requires a symmetric matrix")]
    NotSymmetric,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step constant is zero (empty or zero matrix)")]
    ZeroStepConstant,

    #[error("function-gap stop criterion requires a known optimal value")]
    MissingFstar,

    #[error("strong convexity modulus mu is required")]
    MissingMu,

    #[error("non-finite value produced at iteration {iter}")]
    NonFinite { iter: u64 },

    #[error("iteration budget exhausted after {iters} iterations (residual {residual:e})")]
    BudgetExhausted { iters: u64, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
