use alloc::string::String;
use core::fmt;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A named column (label, id, or expression axis) is absent.
    MissingColumn { name: String },
    /// A cell that is neither numeric nor a missing token.
    ParseError { row: usize, column: String, value: String },
    /// No rows survive ingestion, or an operation received zero rows.
    EmptyDataset,
    /// Incompatible shapes between two inputs.
    DimensionMismatch { expected: usize, got: usize },
    /// Test fraction outside (0, 1).
    InvalidFraction { value: f64 },
    /// A class is absent or a split would leave it without train or test rows.
    DegenerateClass,
    /// Synthetic-generator configuration violates its invariants.
    ConfigError { reason: String },
    /// MLP layer list too short or contains a zero size.
    InvalidArchitecture { reason: String },
    /// Gradient computation on an empty batch.
    EmptyBatch,
    /// Training loss went NaN/Inf; run aborted.
    NonFiniteLoss { epoch: usize },
    /// A learner hyperparameter outside its valid range.
    InvalidHyperparameter { reason: String },
    /// Fold count outside [2, min class count].
    InvalidFolds { n_folds: usize },
    /// k outside [1, number of distinct points].
    InvalidK { k: usize, n_points: usize },
    TooFewPoints { needed: usize, got: usize },
    /// Lengths of paired per-row inputs differ.
    LengthMismatch { expected: usize, got: usize },
    /// A clustering result does not match the point set it claims to describe.
    InconsistentInput,
    /// Hypergeometric parameters violate 0 <= k <= min(K, n), K <= N, n <= N.
    InvalidCounts { reason: String },
    /// A p-value outside (0, 1].
    InvalidP { value: f64 },
    /// Enrichment target contains ids absent from the background.
    TargetNotSubset,
    EmptySet,
    /// Metric computation on empty label vectors.
    Empty,
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::MissingColumn { name } => write!(f, "missing column: {name}"),
            CoreError::ParseError { row, column, value } => {
                write!(f, "unparseable value {value:?} at row {row}, column {column}")
            }
            CoreError::EmptyDataset => write!(f, "dataset has no rows"),
            CoreError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            CoreError::InvalidFraction { value } => {
                write!(f, "test fraction {value} not in (0, 1)")
            }
            CoreError::DegenerateClass => {
                write!(f, "a class is missing or would end up empty in a partition")
            }
            CoreError::ConfigError { reason } => write!(f, "invalid generator config: {reason}"),
            CoreError::InvalidArchitecture { reason } => {
                write!(f, "invalid architecture: {reason}")
            }
            CoreError::EmptyBatch => write!(f, "empty batch"),
            CoreError::NonFiniteLoss { epoch } => {
                write!(f, "non-finite training loss at epoch {epoch}")
            }
            CoreError::InvalidHyperparameter { reason } => {
                write!(f, "invalid hyperparameter: {reason}")
            }
            CoreError::InvalidFolds { n_folds } => write!(f, "invalid fold count {n_folds}"),
            CoreError::InvalidK { k, n_points } => {
                write!(f, "k = {k} invalid for {n_points} distinct points")
            }
            CoreError::TooFewPoints { needed, got } => {
                write!(f, "need at least {needed} points, got {got}")
            }
            CoreError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            CoreError::InconsistentInput => write!(f, "clustering result inconsistent with points"),
            CoreError::InvalidCounts { reason } => {
                write!(f, "invalid hypergeometric counts: {reason}")
            }
            CoreError::InvalidP { value } => write!(f, "p-value {value} not in (0, 1]"),
            CoreError::TargetNotSubset => write!(f, "target set is not a subset of the background"),
            CoreError::EmptySet => write!(f, "empty gene set"),
            CoreError::Empty => write!(f, "empty input"),
        }
    }
}

pub type Result<T> = core::result::Result<T, CoreError>;
