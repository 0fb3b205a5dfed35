use thiserror::Error;

/// Errors produced by the numerical kernels and the probe/optimizer layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid Gram row: {0}")]
    InvalidGramRow(String),

    #[error("invalid spectrum: {0}")]
    Spectrum(String),

    #[error("singular squeezed-state denominator at k = {k} (|d| = {magnitude:e})")]
    Singularity { k: usize, magnitude: f64 },

    #[error("solver did not converge: {0}")]
    Convergence(String),

    #[error("truncation tail {tail:e} above 1e-12 at index cap {cap}")]
    Truncation { tail: f64, cap: usize },

    #[error("unsupported probe for this operation: {0}")]
    UnsupportedProbe(String),
}

pub type Result<T> = std::result::Result<T, Error>;
