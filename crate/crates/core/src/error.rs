use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quaternion {0} has no inverse")]
    ZeroDivisor(String),

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("variance must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("sparsity {s} out of range for length {n}")]
    SparsityOutOfRange { s: usize, n: usize },

    #[error("length {len} is not a multiple of {group}")]
    BadLength { len: usize, group: usize },

    #[error("factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("support enumeration needs {required} supports, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("restricted isometry constant {0:e} is too small to normalize by")]
    DegenerateDelta(f64),

    #[error("delta_2s = {0} violates delta_2s < sqrt(2) - 1")]
    ConditionViolated(f64),

    #[error("point skipped: {0}")]
    SkippedPoint(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ZeroDivisor(_) => "ZeroDivisor",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::InvalidVariance(_) => "InvalidVariance",
            Error::SparsityOutOfRange { .. } => "SparsityOutOfRange",
            Error::BadLength { .. } => "BadLength",
            Error::FactorizationFailure(_) => "FactorizationFailure",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::DegenerateDelta(_) => "DegenerateDelta",
            Error::ConditionViolated(_) => "ConditionViolated",
            Error::SkippedPoint(_) => "SkippedPoint",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "IoFailure",
            Error::Json(_) => "JsonFailure",
        }
    }
}
