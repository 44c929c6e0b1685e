use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("signal has empty support")]
    EmptySupport,

    #[error("reference quantity is zero: {0}")]
    ZeroReference(&'static str),

    #[error("invalid sparsity {k}: must satisfy 1 <= k <= {max}")]
    InvalidSparsity { k: usize, max: usize },

    #[error("invalid order {order}: must satisfy 1 <= order <= {n}")]
    InvalidOrder { order: usize, n: usize },

    #[error("index {index} out of range for {n} columns")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("C({n}, {k}) = {subsets} subsets exceeds the budget of {budget}")]
    SubsetBudgetExceeded {
        n: usize,
        k: usize,
        subsets: u128,
        budget: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "traces diverge at iteration {iteration}: noisy selected {noisy}, clean selected {clean}"
    )]
    TraceMismatch {
        iteration: usize,
        noisy: usize,
        clean: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(
        context: &'static str,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
