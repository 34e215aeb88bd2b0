//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CovarError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Root-finding bracket does not straddle a sign change.
    #[error("bracket error: no sign change on [{lo}, {hi}] (f: {f_lo}, {f_hi})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// Iteration budget exhausted; carries the best estimate and its residual.
    #[error("convergence failure after {iterations} iterations: best x = {best}, residual = {residual}")]
    Convergence {
        best: f64,
        residual: f64,
        iterations: usize,
    },

    /// Requested moment does not exist for the distribution.
    #[error("undefined moment: {0}")]
    UndefinedMoment(String),

    /// Monte-Carlo band captured too few samples for a valid estimate.
    #[error("insufficient data: {got} samples in band, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    /// Input data is degenerate (constant series, all ties, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// CSV / file parsing failure.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CovarError>;
