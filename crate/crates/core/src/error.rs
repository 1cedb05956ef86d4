use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped by the stage that raises them. [`Error::exit_code`]
/// maps them onto the command-line exit codes.
#[derive(Debug, Error)]
pub enum Error {
    // ingestion
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("non-positive price at line {line}")]
    NonPositivePrice { line: usize },

    #[error("duplicate date {date} at line {line}")]
    DuplicateDate { line: usize, date: chrono::NaiveDate },

    #[error("empty file: {0}")]
    EmptyFile(String),

    #[error("missing column '{0}' in header")]
    MissingColumn(String),

    #[error("only {common} common dates across series, need at least 3")]
    InsufficientOverlap { common: usize },

    #[error("duplicate asset id '{0}'")]
    DuplicateAssetId(String),

    #[error("network error: {0}")]
    Network(String),

    #[error("http status {0}")]
    HttpStatus(u16),

    #[error("payload parse error: {0}")]
    PayloadParse(String),

    // estimation
    #[error("degenerate series '{0}': zero variance")]
    DegenerateSeries(String),

    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no overlapping samples after lag alignment")]
    EmptyOverlap,

    #[error("moment matrix is singular (condition estimate {cond:e})")]
    SingularMomentMatrix { cond: f64 },

    // windowing
    #[error("window of {length} observations does not fit in {available}")]
    WindowTooLarge { length: usize, available: usize },

    #[error("window {index}: {source}")]
    InWindow {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    // synthesis
    #[error("unstable process specification: {0}")]
    UnstableSpec(String),

    // output
    #[error("format {format} cannot represent a {shape}")]
    UnsupportedFormatForShape {
        format: &'static str,
        shape: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config field '{field}': {reason}")]
    Config { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Attach a window index, leaving already-wrapped errors alone.
    pub(crate) fn in_window(self, index: usize) -> Self {
        match self {
            e @ Error::InWindow { .. } => e,
            e => Error::InWindow {
                index,
                source: Box::new(e),
            },
        }
    }

    /// Exit code: 2 for usage/validation problems, 3 for estimator failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateSeries(_)
            | Error::TooFewSamples { .. }
            | Error::LengthMismatch(..)
            | Error::EmptyOverlap
            | Error::SingularMomentMatrix { .. }
            | Error::Network(_)
            | Error::HttpStatus(_)
            | Error::Io { .. } => 3,
            Error::InWindow { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
