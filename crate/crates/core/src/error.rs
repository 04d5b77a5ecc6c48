use std::path::PathBuf;

use thiserror::Error;

use crate::canon::Testament;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid token key {0:?}")]
    InvalidKey(String),
    #[error("{book} is not a book of the {expected}")]
    WrongTestament {
        book: &'static str,
        expected: Testament,
    },
    #[error("{0} appears more than once")]
    DuplicateBook(&'static str),
    #[error("span {start}+{length} lies outside {book} ({book_len} words)")]
    SpanOutOfBounds {
        book: &'static str,
        start: usize,
        length: usize,
        book_len: usize,
    },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at line {line}, byte {offset}: {message}")]
    Xml {
        line: usize,
        offset: u64,
        message: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("corpus file: {0}")]
    Container(String),
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("n-gram size must be at least 2, got {0}")]
    WindowTooSmall(usize),
    #[error("raw matches mix window sizes {0} and {1}")]
    MixedWindowSizes(usize, usize),
    #[error("quotation {0} does not match the corpora")]
    Unverified(String),
    #[error("quotation CSV line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix has no nonzero cell; the log transform is undefined")]
    AllZero,
    #[error("cluster count {k} outside 1..={points}")]
    ClusterCount { k: usize, points: usize },
    #[error("PCA with {dims} components needs at least {} points, got {points}", dims + 1)]
    TooFewPoints { dims: usize, points: usize },
    #[error("points have inconsistent dimensions")]
    Ragged,
    #[error("matrix CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Parse(_) => 2,
            PipelineError::Degenerate(_) => 3,
            PipelineError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> PipelineError {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<IngestError> for PipelineError {
    fn from(e: IngestError) -> Self {
        PipelineError::Parse(e.to_string())
    }
}

impl From<DetectError> for PipelineError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::WindowTooSmall(_) => PipelineError::Config(e.to_string()),
            _ => PipelineError::Parse(e.to_string()),
        }
    }
}

impl From<NumericsError> for PipelineError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::ClusterCount { .. } => PipelineError::Config(e.to_string()),
            NumericsError::Csv(_) => PipelineError::Parse(e.to_string()),
            _ => PipelineError::Degenerate(e.to_string()),
        }
    }
}
