use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular system: pivot {pivot:e} at column {column} is below threshold")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parse error at row {row}, column {column}: {value:?} is not a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),

    #[error("k = {k} is outside [1, {max}]")]
    InvalidK { k: usize, max: usize },

    #[error("need at least {needed} points, have {available}")]
    TooFewPoints { needed: usize, available: usize },

    #[error("rank collapse: cross-covariance vanished for row {row}")]
    RankCollapse { row: usize },

    #[error("silhouette needs at least two distinct labels")]
    SingleClass,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("original-space silhouette {0:e} is too close to zero")]
    DegenerateDenominator(f64),

    #[error("need at least {needed} samples, have {available}")]
    TooFewSamples { needed: usize, available: usize },

    #[error("invalid interval [{a}, {b}] with {steps} steps")]
    InvalidInterval { a: f64, b: f64, steps: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. }
                | Error::DegenerateData(_)
                | Error::RankCollapse { .. }
                | Error::DegenerateDenominator(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
