//! Error types shared across the crate.

use thiserror::Error;

/// Coarse error class, used to pick process exit codes and to tag the
/// machine-readable error JSON emitted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input data (exit code 1).
    Parse,
    /// Invalid configuration: bad flags, unusable paths, impossible
    /// parameter combinations (exit code 2).
    Config,
    /// A violated internal contract (exit code 3).
    Internal,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Config => "config",
            ErrorKind::Internal => "internal",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 1,
            ErrorKind::Config => 2,
            ErrorKind::Internal => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("hierarchy line {line}: {message}")]
    HierarchyParse { line: usize, message: String },

    #[error("hierarchy contains a cycle involving '{feature}'")]
    HierarchyCycle { feature: String },

    #[error("unknown feature '{feature}'")]
    UnknownFeature { feature: String },

    #[error("dataset row {row}: {message}")]
    DatasetParse { row: usize, message: String },

    #[error("dataset: {message}")]
    DatasetShape { message: String },

    #[error("feature '{feature}' is not part of the hierarchy")]
    FeatureNotInHierarchy { feature: String },

    #[error("hierarchy-consistency violations found: {count}")]
    InconsistentDataset { count: usize },

    #[error("invalid fold configuration: {message}")]
    FoldConfig { message: String },

    #[error("class '{label}' has no instances in the training split of fold {fold}")]
    ClassMissingInFold { fold: usize, label: String },

    #[error("missing value for feature '{feature}'")]
    MissingValue { feature: String },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("edge weights have not been assigned; score the candidate set first")]
    WeightsUnassigned,

    #[error("undefined metric: {message}")]
    UndefinedMetric { message: String },

    #[error("class counts must both be positive to compute an imbalance degree")]
    ZeroClassCount,

    #[error("degenerate input: {message}")]
    DegenerateInput { message: String },

    #[error("insufficient data: {message}")]
    InsufficientData { message: String },

    #[error("unknown label '{label}'")]
    UnknownLabel { label: String },

    #[error("synthesis: {message}")]
    Synth { message: String },

    #[error("report '{path}': {message}")]
    Report { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::HierarchyParse { .. }
            | Error::HierarchyCycle { .. }
            | Error::DatasetParse { .. }
            | Error::DatasetShape { .. }
            | Error::InconsistentDataset { .. }
            | Error::Report { .. }
            | Error::Json(_) => ErrorKind::Parse,

            Error::UnknownFeature { .. }
            | Error::FeatureNotInHierarchy { .. }
            | Error::FoldConfig { .. }
            | Error::UnknownLabel { .. }
            | Error::Synth { .. }
            | Error::InsufficientData { .. }
            | Error::DegenerateInput { .. }
            | Error::ZeroClassCount
            | Error::ClassMissingInFold { .. }
            | Error::UndefinedMetric { .. }
            | Error::EmptyTrainingSet
            | Error::Io(_) => ErrorKind::Config,

            Error::MissingValue { .. } | Error::WeightsUnassigned => ErrorKind::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
