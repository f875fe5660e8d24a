use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A repository or workload file failed to parse or validate.
    #[error("{path}:{line}: {message}")]
    Ingestion {
        path: String,
        line: usize,
        message: String,
    },

    /// A domain invariant was violated when constructing a value.
    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    /// Configuration is inconsistent (bad bounds, mismatched sizes, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The input series cannot support estimation (constant, too short).
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// A fitted model failed the stationarity/invertibility check.
    #[error("non-stationary fit: {0}")]
    NonStationary(String),

    /// Two series that must cover identical timesteps differ in length.
    #[error("mismatched series lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn ingestion(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        Error::Ingestion {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: message.into(),
        }
    }
}
