use std::io;

use thiserror::Error;

/// Errors produced by the rotor solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {len} rotors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("quadrature oracle limited to n <= {max} rotors (got {n})")]
    QuadratureTooLarge { n: usize, max: usize },

    #[error("fourier solver requires uniform vertex weights, got h[{index}] = {value} vs h[0] = {first}")]
    NonUniformWeights { index: usize, value: f64, first: f64 },

    #[error("preconditioner diagonal is nonpositive ({0:e})")]
    NonPositiveDiagonal(f64),

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("inverse iteration did not converge in {iterations} iterations (last change {change:e})")]
    InverseIterationNotConverged { iterations: usize, change: f64 },

    #[error("stochastic reconfiguration solve failed: {0}")]
    SolveFailed(String),

    #[error("too few retained samples: {0} (need at least 2)")]
    TooFewSamples(usize),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
