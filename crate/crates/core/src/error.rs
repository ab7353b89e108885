use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("concordance index undefined: no comparable pairs")]
    UndefinedConcordance,

    #[error("correlation undefined: input vector is constant")]
    UndefinedCorrelation,

    #[error("median survival undefined: survival curve never reaches 0.5")]
    UndefinedMedian,

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error(
        "hazard training needs batch_size >= 2: a single-subject batch has a risk set of one, \
         so the Cox partial likelihood is identically zero and yields no gradient"
    )]
    SingleSubjectCoxBatch,

    #[error("stratum '{stratum}' has {size} subjects, too few to populate every partition")]
    StratumTooSmall { stratum: String, size: usize },

    #[error("invalid layer selector: layer {index} requested, network has {available} hidden layers")]
    InvalidLayer { index: usize, available: usize },

    #[error("model did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Validation failures from tabular input, with file/row/column provenance.
///
/// Row numbers are 1-based and count the header as row 1, so they match what
/// a spreadsheet or `nl` shows.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file}: missing required column '{column}'")]
    MissingColumn { file: String, column: String },

    #[error("{file}:{row}: duplicate subject id '{id}'")]
    DuplicateId { file: String, row: usize, id: String },

    #[error("{file}:{row}: column '{column}' has non-numeric value '{value}'")]
    NonNumeric {
        file: String,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{file}:{row}: column '{column}' is empty; missing values are not imputed")]
    MissingValue { file: String, row: usize, column: String },

    #[error("{file}:{row}: event must be 0 or 1, found '{value}'")]
    InvalidEvent { file: String, row: usize, value: String },

    #[error("{file}:{row}: time must be finite and >= 0, found '{value}'")]
    InvalidTime { file: String, row: usize, value: String },

    #[error("{file}:{row}: expected {expected} fields, found {found}")]
    Ragged {
        file: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{file}: malformed csv: {message}")]
    Malformed { file: String, message: String },

    #[error("no subject id appears in both the feature table and the survival table")]
    EmptyJoin,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
