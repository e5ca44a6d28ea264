use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("label column `{0}` appears more than once in header")]
    DuplicateLabelColumn(String),

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: value is not finite")]
    NonFinite { row: usize, column: String },

    #[error("row {row}, column `{column}`: invalid class label `{value}`")]
    InvalidLabel {
        row: usize,
        column: String,
        value: String,
    },

    #[error("rating {0} is outside 1..=5")]
    InvalidRating(i64),

    #[error("table has no rows")]
    EmptyTable,

    #[error("table has no feature columns")]
    NoFeatures,

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("k = {k} is too large for a table with {rows} rows")]
    KTooLarge { k: usize, rows: usize },

    #[error("k must be at least 1")]
    ZeroK,

    #[error("row {0} is out of range")]
    RowOutOfRange(usize),

    #[error("class {class} has no members other than row {owner}")]
    NoWithinClassNeighbor { class: u32, owner: usize },

    #[error("class {0} has no instances to oversample")]
    EmptyClass(u32),

    #[error("class {0} has a single instance; enable single-member fallback to duplicate it")]
    SingleMemberClass(u32),

    #[error("class {class} has {count} instances; at least {required} are required")]
    TooFewInstances {
        class: u32,
        count: usize,
        required: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("histogram needs at least one value")]
    EmptyHistogram,

    #[error("invalid histogram edges: {0}")]
    InvalidEdges(String),

    #[error("histograms have different bin edges")]
    EdgeMismatch,

    #[error("feature columns differ between tables")]
    FeatureMismatch,

    #[error("class {0} is present in only one of the tables")]
    ClassMismatch(u32),

    #[error("class {0} is absent from the test set")]
    ClassAbsent(u32),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown method `{0}` (expected none, random, smote, b1, b2 or adasyn)")]
    UnknownMethod(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
