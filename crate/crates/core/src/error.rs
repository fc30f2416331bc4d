use std::path::PathBuf;

use thiserror::Error;

use crate::radar::ActivityLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix too small: {0}")]
    ShapeTooSmall(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("path delay {delay_s:e} s outside the fast-time window [0, {window_s:e}) s")]
    DelayOutOfWindow { delay_s: f64, window_s: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt header in {path}: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },

    #[error("shape mismatch in {path}: {reason}")]
    FileShapeMismatch { path: PathBuf, reason: String },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("insufficient samples for class {label}: need {needed}, have {available}")]
    InsufficientSamples {
        label: ActivityLabel,
        needed: usize,
        available: usize,
    },

    #[error("no training records for the {0} class")]
    EmptyClass(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("zero-energy input cannot be normalized")]
    ZeroEnergy,

    #[error("augmentation policy is not in training mode")]
    WrongMode,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("batch normalization needs at least 2 values per channel in train mode, got {0}")]
    DegenerateBatch(usize),

    #[error("unknown architecture variant {name:?}; valid names: {valid}")]
    InvalidVariant { name: String, valid: String },

    #[error("non-finite activation in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("bad detector window {window} for {cols} columns")]
    BadWindow { window: usize, cols: usize },

    #[error("AUC needs at least one positive and one negative score")]
    SingleClass,

    #[error("no test samples for class {0}")]
    MissingClass(ActivityLabel),

    #[error("missing checkpoint for variant {0}")]
    MissingCheckpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Parse(_)
            | Error::InvalidVariant { .. }
            | Error::WrongMode
            | Error::BadWindow { .. } => 2,
            Error::Divergence { .. } | Error::NonFinite(_) => 4,
            _ => 3,
        }
    }
}
