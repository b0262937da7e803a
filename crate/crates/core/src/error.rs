use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least {min}, got {found}")]
    DimensionTooSmall { min: usize, found: usize },

    #[error("column {column} sums to {sum}, expected 1")]
    ColumnSum { column: usize, sum: String },

    #[error("entries sum to {sum}, expected 1")]
    NotNormalized { sum: String },

    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: String },

    #[error("matrix entry ({row}, {col}) is negative ({value})")]
    NegativeMatrixEntry { row: usize, col: usize, value: String },

    #[error("matrix raised to the power {period} is not the identity")]
    PeriodMismatch { period: usize },

    #[error("malformed problem: {0}")]
    Malformed(String),

    #[error("simplex exceeded its iteration budget of {budget} pivots")]
    IterationBudget { budget: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
