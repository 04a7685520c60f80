use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CardioError> = std::result::Result<T, E>;

/// Failure classes, used to pick CLI exit codes and FFI status values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input data, arguments, or configuration.
    Input,
    /// The analysis cannot proceed on this data (empty groups, zero averages).
    Degenerate,
    /// An internal invariant did not hold.
    Internal,
}

#[derive(Debug, Error)]
pub enum CardioError {
    #[error("empty waveform")]
    EmptyWaveform,

    #[error("waveform too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cutoff above Nyquist ({cutoff_hz} Hz at fs = {fs} Hz)")]
    CutoffAboveNyquist { cutoff_hz: f64, fs: f64 },

    #[error("degenerate correlation: waveform has zero variance")]
    DegenerateCorrelation,

    #[error("signal shorter than template ({signal} < {template})")]
    SignalShorterThanTemplate { signal: usize, template: usize },

    #[error("window out of range: start {start}, length {len}, channel length {available}")]
    WindowOutOfRange {
        start: isize,
        len: usize,
        available: usize,
    },

    #[error("index {index} out of range for channel of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("channel rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(f64, f64),

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("empty group")]
    EmptyGroup,

    #[error("degenerate group average (zero RMS)")]
    DegenerateAverage,

    #[error("degenerate split: {criterion} criterion leaves group {group} empty")]
    DegenerateSplit {
        criterion: &'static str,
        group: &'static str,
    },

    #[error("relative difference undefined: same-group mean dissimilarity is zero")]
    ZeroReference,

    #[error("beat overlap: minimum beat period {period} samples < morphology length {len}")]
    BeatOverlap { period: usize, len: usize },

    #[error("missing channel: {0}")]
    MissingChannel(String),

    #[error("non-uniform timestamps at row {row}: expected {expected}, got {got}")]
    NonUniformTimestamps { row: usize, expected: f64, got: f64 },

    #[error("non-finite sample in column {column} at row {row}")]
    NonFiniteSample { row: usize, column: String },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CardioError {
    pub fn kind(&self) -> ErrorKind {
        use CardioError::*;
        match self {
            DegenerateCorrelation | EmptyGroup | DegenerateAverage | DegenerateSplit { .. }
            | ZeroReference => ErrorKind::Degenerate,
            Invariant(_) => ErrorKind::Internal,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CardioError::Io {
            path: path.into(),
            source,
        }
    }
}
