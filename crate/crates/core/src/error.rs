use std::path::PathBuf;

use thiserror::Error;

use crate::dsl::Diagnostic;
use crate::external::ExternalError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{0}` is not covered by the scaler")]
    UnscaledFeature(String),

    #[error("model `{model}`: {source}")]
    ExternalModel {
        model: String,
        #[source]
        source: ExternalError,
    },

    #[error("model `{model}` has {count} input features, exact enumeration is limited to {limit}")]
    TooManyFeatures { model: String, count: usize, limit: usize },

    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("RuleNotInPolicy: no rule named `{0}`")]
    RuleNotInPolicy(String),

    #[error("invalid system: {}", summarize(.0))]
    InvalidSystem(Vec<Diagnostic>),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("{}:{row}:{column}: {message}", path.display())]
    DatasetParse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn summarize(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
