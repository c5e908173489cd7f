//! Error type shared by all fatiguekit modules.

use std::path::PathBuf;

/// Errors produced by profile construction, the fatigue model, ingestion,
/// the biomechanical loader and report emission.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside its allowed range (`dt <= 0`, negative
    /// accumulation, ...).
    #[error("parameter: {0}")]
    Parameter(String),

    /// A value was rejected while validating an input structure
    /// (non-finite sample, non-increasing timestamps, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A time falls outside the domain a profile or series is defined on.
    #[error("domain: {0}")]
    Domain(String),

    /// Text input could not be parsed. `line` is 1-based and counts every
    /// physical line of the input, including comments and the header.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structured document (worker profile, posture, standards map)
    /// references something that does not exist or is malformed.
    #[error("schema: {0}")]
    Schema(String),

    /// Inconsistent configuration (share fractions, missing standard time,
    /// bad override).
    #[error("config: {0}")]
    Config(String),

    /// The reference integrator drove the exertable capacity below its
    /// validity floor; the model ceases to apply at `t_min`.
    #[error("capacity exhausted at t = {t_min} min: {message}")]
    CapacityExhausted { t_min: f64, message: String },

    /// Not enough samples to perform the operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Filesystem failure, annotated with the path involved.
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An internal invariant did not hold. Always a bug, never bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that indicate a bug in this library rather than bad
    /// input; the CLI maps these to a distinct exit code.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
