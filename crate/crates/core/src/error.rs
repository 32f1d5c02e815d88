use std::path::PathBuf;

use thiserror::Error;

/// Coarse failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Numeric,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ensemble of {defects} defects exceeds the configured cap of {cap}")]
    DimensionCap { defects: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time step {dt:e} s does not resolve the carrier (need dt <= {max:e} s)")]
    StepTooCoarse { dt: f64, max: f64 },

    #[error("non-physical density matrix: {0}")]
    NonPhysicalState(String),

    #[error("Floquet quasi-energies did not converge at {drive_freq:e} Hz: error {error:e} Hz with m_max = {m_max}")]
    FloquetNotConverged { drive_freq: f64, error: f64, m_max: usize },

    #[error("sweep point at {freq:e} Hz failed: {source}")]
    SweepPoint {
        freq: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("wrong trace kind: expected {expected}, found {found}")]
    WrongTraceKind { expected: &'static str, found: &'static str },

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema violation in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("unsupported dataset version {0}")]
    UnsupportedVersion(u32),

    #[error("shape mismatch for array '{array}': expected {expected} bytes, found {found}")]
    ShapeMismatch { array: String, expected: u64, found: u64 },

    #[error("dtype mismatch for array '{array}': expected {expected}, found {found}")]
    DtypeMismatch { array: String, expected: String, found: String },

    #[error("refusing to overwrite existing path {0} (pass force to replace it)")]
    AlreadyExists(PathBuf),

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("rendering failed: {0}")]
    Render(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter(_)
            | Error::DimensionCap { .. }
            | Error::StepTooCoarse { .. }
            | Error::Config(_)
            | Error::Json(_) => ErrorCategory::Config,
            Error::Schema { .. }
            | Error::UnsupportedVersion(_)
            | Error::ShapeMismatch { .. }
            | Error::DtypeMismatch { .. }
            | Error::AlreadyExists(_)
            | Error::Csv { .. }
            | Error::Render(_)
            | Error::Io { .. } => ErrorCategory::Io,
            Error::SweepPoint { source, .. } => source.category(),
            Error::DimensionMismatch { .. }
            | Error::NonPhysicalState(_)
            | Error::FloquetNotConverged { .. }
            | Error::AxisMismatch(_)
            | Error::WrongTraceKind { .. }
            | Error::FitRejected(_)
            | Error::Numeric(_) => ErrorCategory::Numeric,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
