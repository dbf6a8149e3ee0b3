use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not circulant (relative deviation {0:e})")]
    NotCirculant(f64),

    #[error("matrix is not Hermitian (relative deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("insufficient observations: {0}")]
    InsufficientObservations(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("reference power is zero")]
    ZeroPower,
}
