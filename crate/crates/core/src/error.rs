use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("local dimension {0} is not a prime")]
    NotPrime(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range [0, {size})")]
    OutOfRange { index: usize, size: usize },

    #[error("operator is not Hermitian (max |A - A^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("matrix is not unitary (max |U U^dagger - I| = {0:.3e})")]
    NotUnitary(f64),

    #[error("conjugation does not permute the Pauli basis up to phases")]
    NotClifford,

    #[error("the identity label has no commuting set")]
    IdentityLabel,

    #[error("orbit did not close within {0} rounds")]
    NonClosure(usize),

    #[error("rounded keys are ambiguous (coefficient gap {0:.3e})")]
    AmbiguousRounding(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("basis is not orthonormal (max Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("vector is not a probability vector: {0}")]
    NotInSimplex(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty Pauli support")]
    EmptySupport,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
