//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An attribute identifier that is not part of the active schema.
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    /// Schema construction rejected the attribute list.
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    /// A catalog / query / judgment record failed to parse.
    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    /// A snapshot or model file is damaged or truncated.
    #[error("corrupt file {path:?}: {message}")]
    Corrupt { path: String, message: String },

    /// A snapshot or model file was written by an incompatible version.
    #[error("unsupported format version {found} in {path:?} (expected {expected})")]
    VersionMismatch {
        path: String,
        found: u32,
        expected: u32,
    },

    /// Feature vector width does not match what the consumer expects.
    #[error("feature width mismatch: expected {expected}, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    /// An anchor attribute was used as its own target.
    #[error("attribute {0:?} cannot anchor itself")]
    SelfAnchor(String),

    /// Training input is unusable (e.g. only one class present).
    #[error("training failed: {0}")]
    Training(String),

    /// A model was applied against data from a different schema.
    #[error("schema fingerprint mismatch: model {model}, data {data}")]
    FingerprintMismatch { model: String, data: String },

    /// Paired slices disagree in length.
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    /// A configuration value or key is invalid.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An artifact failed its manifest checksum validation.
    #[error("checksum mismatch for {path:?}: manifest {expected}, file {actual}")]
    ChecksumMismatch {
        path: String,
        expected: String,
        actual: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn corrupt(path: &std::path::Path, message: impl Into<String>) -> Self {
        Error::Corrupt {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}
