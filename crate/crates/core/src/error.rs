use std::path::PathBuf;

/// Errors surfaced by corpus loading, model I/O, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model file {path} is corrupt: {message}")]
    CorruptModel { path: PathBuf, message: String },

    #[error(
        "model file {path} has format version {found}, this build reads up to version {supported}"
    )]
    UnsupportedVersion {
        path: PathBuf,
        found: u32,
        supported: u32,
    },

    #[error("invalid Pitman-Yor parameters: discount={discount}, strength={strength}")]
    InvalidParams { discount: f64, strength: f64 },

    #[error(
        "model assigned non-positive probability {prob} to token '{token}' \
         (sentence {sentence}, position {position}); smoothed models must never do this"
    )]
    ZeroProbability {
        token: String,
        sentence: usize,
        position: usize,
        prob: f64,
    },

    #[error("reports are not aligned: {0}")]
    ReportMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 2 config, 3 i/o, 4 data format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            _ => 4,
        }
    }
}
