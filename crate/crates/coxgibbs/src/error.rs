//! Error taxonomy for the library.
//!
//! Variants are grouped by failure site so callers (notably the CLI) can map
//! them onto exit codes and structured diagnostics without string matching.

use thiserror::Error;

/// All failures the library can produce.
#[derive(Debug, Error)]
pub enum CoxError {
    /// Input table is structurally unusable (missing column, bad header,
    /// non-binary status column).
    #[error("schema error: {0}")]
    Schema(String),

    /// A kept cell failed to parse. `row` is 1-based over data rows
    /// (header excluded).
    #[error("parse error at data row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    /// Too little data survived ingestion (or a dataset has no events where
    /// events are required).
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A configuration value violates its documented domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The (event, peer) contrast table would exceed the configured cap.
    #[error(
        "pair budget exceeded: dataset needs {required} contrast rows but the cap is {cap}; \
         raise the cap (PairContrasts budget / --pair-cap) or reduce the dataset"
    )]
    PairBudget { required: usize, cap: usize },

    /// No usable (event, peer) pairs exist.
    #[error("empty pair set: {0}")]
    EmptyPairs(String),

    /// A matrix that must be symmetric positive definite failed its Cholesky
    /// factorization.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// Newton solver hit a singular or indefinite Hessian.
    #[error("singular Hessian: {0}")]
    SingularHessian(String),

    /// An iterative solver ran out of iterations or diverged. Carries the
    /// last iterate for postmortems.
    #[error("no convergence after {iterations} iterations: {message} (last iterate {last:?})")]
    NoConvergence {
        iterations: usize,
        message: String,
        last: Vec<f64>,
    },

    /// A likelihood evaluation produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A chain has zero variance where variance is required (ESS).
    #[error("degenerate chain: {0}")]
    DegenerateChain(String),

    /// The finite-sample correction could not be computed; the uncorrected
    /// chain is still valid.
    #[error("correction failed: {0}")]
    Correction(String),

    /// Learning-rate calibration aborted (e.g. too many replicate failures).
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Argument outside its domain (e.g. non-finite tilt).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CoxError {
    /// Stable machine-readable kind tag for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            CoxError::Schema(_) => "schema",
            CoxError::Parse { .. } => "parse",
            CoxError::InsufficientData(_) => "insufficient_data",
            CoxError::InvalidConfig(_) => "invalid_config",
            CoxError::PairBudget { .. } => "pair_budget",
            CoxError::EmptyPairs(_) => "empty_pairs",
            CoxError::NotPositiveDefinite(_) => "not_positive_definite",
            CoxError::SingularHessian(_) => "singular_hessian",
            CoxError::NoConvergence { .. } => "no_convergence",
            CoxError::Evaluation(_) => "evaluation",
            CoxError::DegenerateChain(_) => "degenerate_chain",
            CoxError::Correction(_) => "correction",
            CoxError::Calibration(_) => "calibration",
            CoxError::InvalidArgument(_) => "invalid_argument",
            CoxError::Io(_) => "io",
            CoxError::Csv(_) => "csv",
        }
    }
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, CoxError>;
