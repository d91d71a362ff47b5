use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("non-finite value at row {row}, column {column:?}")]
    NonFinite { row: usize, column: String },

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("dataset has {0} class(es); at least 2 are required")]
    TooFewClasses(usize),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("class {class} has {rows} row(s); at least {required} required")]
    ClassTooSmall {
        class: usize,
        rows: usize,
        required: usize,
    },

    #[error("client {client} received an empty shard")]
    EmptyShard { client: usize },

    #[error("client {client} shard of {rows} row(s) is too small for a validation split")]
    ShardTooSmall { client: usize, rows: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("class counts are all zero")]
    EmptyCounts,

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("wire format error: {0}")]
    Wire(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Wire(err.to_string())
    }
}

impl Error {
    /// Data-side failures: bad input files or datasets that cannot satisfy
    /// a split or partition.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Csv(_)
                | Error::Parse { .. }
                | Error::NonFinite { .. }
                | Error::MissingLabelColumn(_)
                | Error::TooFewClasses(_)
                | Error::InvalidDataset(_)
                | Error::ClassTooSmall { .. }
                | Error::EmptyShard { .. }
                | Error::ShardTooSmall { .. }
        )
    }

    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParameter(_))
    }
}
