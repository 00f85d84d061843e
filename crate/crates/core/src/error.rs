use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A problem with one line of an input file.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    /// 1-based line number in the source text.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Record(RecordError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("column layout mismatch: expected {expected} columns, found {found}")]
    Layout { expected: usize, found: usize },

    #[error("class `{class}` has {count} members, fewer than k = {k}")]
    ClassTooSmall { class: String, count: usize, k: usize },

    #[error("degenerate variance: all paired differences are equal")]
    DegenerateVariance,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unknown class label `{0}`")]
    UnknownClass(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: std::path::PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps `self` with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

impl From<RecordError> for Error {
    fn from(e: RecordError) -> Self {
        Error::Record(e)
    }
}
