use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("neighborhood size {k} out of range for {n} points (need 1 <= k <= n-1)")]
    KOutOfRange { k: usize, n: usize },

    #[error("requested {requested} neighbors but only {available} are available")]
    KTooLarge { requested: usize, available: usize },

    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),

    #[error("value at index {index} is not strictly positive")]
    NonPositiveValue { index: usize },

    #[error("need at least {needed} values, found {found}")]
    TooFewValues { needed: usize, found: usize },

    #[error("block size {m} is too large for {n} points (need 2m <= n)")]
    ContaminationTooLarge { m: usize, n: usize },

    #[error("block size {m} is too small (need at least 2 points per block)")]
    ContaminationTooSmall { m: usize },

    #[error("grid infeasible: contamination {c} with n = {n} gives floor(c*n) = {m}")]
    GridInfeasible { c: f64, n: usize, m: usize },

    #[error("invalid tuning grid: {0}")]
    InvalidGrid(String),

    #[error("invalid projection dimensions: input {input_dim}, output {output_dim}")]
    InvalidDims { input_dim: usize, output_dim: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("labels contain only one class")]
    OneClassOnly,

    #[error("unknown generator {name:?}; valid names: {valid}")]
    UnknownGenerator { name: String, valid: String },

    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("failed to deserialize model at byte {offset}: {message}")]
    DeserializeFailure { offset: usize, message: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
