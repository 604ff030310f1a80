use thiserror::Error;

use crate::operator::Basis;
use crate::symbol::Frame;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("index {index} out of range 0..{bound}")]
    Index { index: i64, bound: usize },

    #[error("symbol frame mismatch: expected {expected}, found {found}")]
    Frame { expected: Frame, found: Frame },

    #[error("operator basis mismatch: expected {expected}, found {found}")]
    Basis { expected: Basis, found: Basis },

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error(
        "quadrature did not converge: max entry change {max_change:e} > {tolerance:e} \
         at (N_p, N_q) = ({n_p}, {n_q}) -> ({}, {})",
        2 * n_p,
        2 * n_q
    )]
    Accuracy {
        max_change: f64,
        tolerance: f64,
        n_p: usize,
        n_q: usize,
    },

    #[error("function outside the quasi-periodic space: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
