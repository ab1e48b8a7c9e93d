use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Validation,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("{path}: {source}")]
    IoAt { path: PathBuf, source: io::Error },

    // dataset
    #[error("no class subdirectories found under {0}")]
    NoClasses(PathBuf),
    #[error("class directory `{0}` contains no decodable images")]
    EmptyClass(String),
    #[error("class `{0}` has fewer than 2 records and cannot be split")]
    ClassTooSmall(String),
    #[error("duplicate class name `{0}`")]
    DuplicateClass(String),
    #[error("index {index} out of range for {len} classes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("train fraction {0} is not in (0, 1)")]
    InvalidFraction(f64),
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSynthetic(String),
    #[error("manifest {path}, line {line}: {msg}")]
    Manifest {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    // images and preprocessing
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid filter kernel {0}: must be odd and fit inside the image")]
    InvalidKernel(usize),
    #[error("invalid target size {height}x{width}")]
    InvalidSize { height: usize, width: usize },
    #[error("cannot normalize an empty tensor")]
    EmptyInput,
    #[error("invalid normalization range [{n_min}, {n_max}]")]
    InvalidRange { n_min: f64, n_max: f64 },

    // network
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("invalid training configuration: {0}")]
    InvalidTrainConfig(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    // metrics
    #[error("truth and prediction lists differ in length ({truths} vs {predictions})")]
    LengthMismatch { truths: usize, predictions: usize },
    #[error("label {label} is not in [0, {k})")]
    InvalidLabel { label: usize, k: usize },
    #[error("binary counts are all zero")]
    EmptyCounts,
    #[error("ratio {0} is outside [0, 1]")]
    InvalidRatio(f64),
    #[error("{0}")]
    Table(String),
}

impl Error {
    pub fn io_at(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::IoAt {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) | Error::IoAt { .. } => ErrorKind::Io,
            Error::InvalidShape(_) | Error::Diverged { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Validation,
        }
    }
}
