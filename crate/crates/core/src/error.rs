use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VariableMismatch { left: usize, right: usize },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: u32, right: u32 },

    #[error("point has {got} coordinates, form has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} requires an even degree, got {1}")]
    OddDegree(&'static str, u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("form is not in the mean-zero hyperplane (sphere integral {0:e})")]
    NonzeroMean(f64),

    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("zero vector not allowed")]
    ZeroVector,

    #[error("uncertified witness #{index}: sphere minimum {min:e}")]
    UncertifiedWitness { index: usize, min: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
