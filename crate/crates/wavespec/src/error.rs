//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid wavelet scale {0} (scales are 1-based)")]
    InvalidScale(usize),

    #[error("series length {0} is not a power of two")]
    NonDyadicLength(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is singular or ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient replicates: {0}")]
    InsufficientReplicates(String),

    #[error("unknown model id {0:?}")]
    UnknownModel(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
