use thiserror::Error;

use crate::mi::DualSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("column '{column}' is declared continuous but holds non-numeric value '{value}'")]
    NonNumeric { column: String, value: String },

    #[error("every row was dropped because of missing cells")]
    AllRowsDropped,

    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("duplicate column '{0}'")]
    DuplicateColumn(String),

    #[error("column '{0}' is constant")]
    ConstantColumn(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} = {value} is outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature list is empty")]
    EmptyFeatures,

    #[error("conditional block '{block}' has {rows} rows, need at least {needed}")]
    InsufficientRows {
        block: String,
        rows: usize,
        needed: usize,
    },

    #[error("copula dimension {dimension} exceeds the quadrature budget of {max}")]
    DimensionBudget { dimension: usize, max: usize },

    #[error(
        "dual solver did not converge after {} iterations (gradient norm {:.3e}, objective {:.6})",
        .best.iterations, .best.gradient_norm, .best.objective
    )]
    NonConvergence { best: Box<DualSolution> },

    #[error("could not project the correlation matrix to a positive-definite one")]
    ProjectionFailure,

    #[error("metric '{0}' is not available for this problem")]
    MissingMetric(String),

    #[error("protocol error at line {line}: {message}")]
    Protocol { line: usize, message: String },
}

impl Error {
    /// True for failures of the numerical solver rather than of the inputs.
    pub fn is_solver(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::ProjectionFailure)
    }
}
