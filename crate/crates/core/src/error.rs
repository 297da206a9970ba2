use thiserror::Error;

/// Errors raised by the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("integration failure at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error(
        "Picard iteration is not contracting after {iterations} iterations \
         (last ratio {ratio:.3}); try a shorter horizon"
    )]
    NonContraction { iterations: usize, ratio: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
