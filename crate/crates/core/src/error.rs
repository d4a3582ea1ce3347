use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

/// One rejected input row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the file (the header is line 1).
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {} invalid row(s): {}", .rows.len(), join_rows(.rows))]
    InvalidRows { path: PathBuf, rows: Vec<RowError> },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("dates not strictly increasing at {0}")]
    NonMonotoneDates(NaiveDate),

    #[error("invalid bar on {date}: {reason}")]
    InvalidBar { date: NaiveDate, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("schema mismatch: expected {expected}, found {found}")]
    Schema { expected: String, found: String },

    #[error("malformed report: {0}")]
    MalformedReport(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("singular design matrix")]
    SingularDesign,

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn join_rows(rows: &[RowError]) -> String {
    rows.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateRegression(_)
                | Error::SingularDesign
                | Error::Optimizer(_)
                | Error::Numerical(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
