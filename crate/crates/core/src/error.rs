use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing manifest: {0}")]
    MissingManifest(PathBuf),

    #[error("missing view file: {0}")]
    MissingViewFile(PathBuf),

    #[error("missing graph file: {0}")]
    MissingGraphFile(PathBuf),

    #[error("missing label file: {0}")]
    MissingLabelFile(PathBuf),

    #[error("malformed {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error("row-count mismatch: view {view} has {got} rows, expected {expected}")]
    RowMismatch {
        view: usize,
        got: usize,
        expected: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("asymmetric graph: weight({i},{j}) != weight({j},{i})")]
    AsymmetricGraph { i: usize, j: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("label {label} out of range for {clusters} clusters")]
    LabelOutOfRange { label: usize, clusters: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dense solve capped at n = {cap}, got n = {n}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("only {available} indices carry positive probability, cannot draw {requested}")]
    InsufficientMass { requested: usize, available: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no sweep parameters")]
    EmptySweep,

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(what: impl Into<String>, detail: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            detail: detail.to_string(),
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
