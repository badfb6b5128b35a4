use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
///
/// Display strings start with the variant name so callers (and the CLI's
/// stderr) can match on a stable token.
#[derive(Debug, Error)]
pub enum Error {
    #[error("MalformedHeader: line {line}: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("RaggedData: {0}")]
    RaggedData(String),
    #[error("UnknownLabel: line {line}: label {label:?} not declared")]
    UnknownLabel { line: usize, label: String },
    #[error("MissingValue: line {line}: missing value '?' is not supported")]
    MissingValue { line: usize },
    #[error("NonFiniteValue: {0}")]
    NonFiniteValue(String),
    #[error("MalformedValue: line {line}: cannot parse {token:?}")]
    MalformedValue { line: usize, token: String },
    #[error("InvalidDataset: {0}")]
    InvalidDataset(String),
    #[error("IoFailure: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("Csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("IndexOutOfRange: channel {index} with {channels} channels")]
    IndexOutOfRange { index: usize, channels: usize },
    #[error("DuplicateChannel: channel {0} listed twice")]
    DuplicateChannel(usize),
    #[error("EmptySelection: no channels selected")]
    EmptySelection,
    #[error("EmptyClass: class {0} has no instances")]
    EmptyClass(usize),
    #[error("TooFewClasses: need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("EmptyScores: elbow cut needs at least one score")]
    EmptyScores,
    #[error("NonFiniteScore: score at channel {0} is not finite")]
    NonFiniteScore(usize),
    #[error("InsufficientInstances: {0}")]
    InsufficientInstances(String),
    #[error("UnknownStrategy: {0:?}")]
    UnknownStrategy(String),
    #[error("UnknownClassifier: {0:?}")]
    UnknownClassifier(String),
    #[error("UnknownPrototypeKind: {0:?}")]
    UnknownPrototypeKind(String),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("TooShortSeries: length {0} is below the minimum kernel length 7")]
    TooShortSeries(usize),
    #[error("SingleClass: training data holds a single class")]
    SingleClass,
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("EmptyInput: nothing to summarize")]
    EmptyInput,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures caused by unreadable or malformed input files, as
    /// opposed to errors raised by the selection/classification domain.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedHeader { .. }
                | Error::RaggedData(_)
                | Error::UnknownLabel { .. }
                | Error::MissingValue { .. }
                | Error::NonFiniteValue(_)
                | Error::MalformedValue { .. }
                | Error::InvalidDataset(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
