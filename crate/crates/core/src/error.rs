use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range (space has {len} functions)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear solver failed: {reason}")]
    Solver { reason: String, residuals: Vec<f64> },

    #[error("matrix of size {size} exceeds the dense cap of {cap}")]
    DenseCap { size: usize, cap: usize },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
