use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent sizes, grids, or parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operator applied outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// `exp(tau * |k|^s)` would not be representable as a finite f64.
    #[error("gevrey weight overflows at mode ({k1}, {k2}): exponent {exponent:.3} exceeds {limit:.3}")]
    Overflow {
        k1: i64,
        k2: i64,
        exponent: f64,
        limit: f64,
    },

    /// Operation called on a state of the wrong kind (e.g. vorticity on Darcy).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("solution diverged at step {step} (t = {time}): {detail}")]
    Divergence {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("insufficient data: {usable} usable shells, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    /// Malformed input series (non-monotone time grid, length mismatch, ...).
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
