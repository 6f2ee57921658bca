use std::path::PathBuf;

use thiserror::Error;

use crate::space::IndexVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("cardinality of the space overflows u64")]
    CardinalityOverflow,

    #[error("index {index} out of range for variable {var} with {count} values")]
    IndexOutOfRange {
        var: usize,
        index: usize,
        count: usize,
    },

    #[error("index vector has {got} entries, space has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("table has no entry for index vector {0:?}")]
    MissingTableEntry(IndexVector),

    #[error("{path}:{line}: {message}")]
    TableFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("cardinality {cardinality} exceeds the enumeration limit {limit}")]
    EnumerationLimit { cardinality: u64, limit: u64 },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("budget {budget} is not divisible by the interval count {intervals}")]
    BudgetNotDivisible { budget: usize, intervals: usize },

    #[error("invalid metric input: {0}")]
    InvalidMetric(String),

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("config {config_index} run {run_index}: {source}")]
    Run {
        config_index: usize,
        run_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("seed {0} is used by more than one run")]
    SeedCollision(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
