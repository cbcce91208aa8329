use thiserror::Error;

/// Errors produced by grid construction, solvers and fitting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("multiplier symbol is not finite at xi = {xi}")]
    NonFiniteSymbol { xi: f64 },

    #[error("moment of order {alpha} is untrusted: tail estimate {tail:.3e} exceeds threshold {threshold:.3e}")]
    UntrustedMoment { alpha: usize, tail: f64, threshold: f64 },

    #[error("rate fit window is inadequate: {0}")]
    FitWindow(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations; contraction history {history:?}")]
    NoConvergence { iterations: usize, history: Vec<f64> },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
