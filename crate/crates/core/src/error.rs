use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure carries a stable machine-readable code (see [`Error::code`])
/// in addition to the human text.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input violates a documented invariant.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    /// A shape in a phantom specification could not be placed on the grid.
    #[error("shape #{index} {message}")]
    Shape { index: usize, message: String },

    /// The receiver saw no carrier on any sample.
    #[error("no carrier{}", angle.map(|a| format!(" at angle #{a}")).unwrap_or_default())]
    NoCarrier { angle: Option<usize> },

    /// A numerical stage failed at run time.
    #[error("{stage}: {message}")]
    Compute { stage: String, message: String },

    /// A file could not be decoded. `offset` is the byte position of the problem.
    #[error("parse error in {what} at byte {offset}: {message}")]
    Parse {
        what: String,
        offset: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A metrics threshold configured as a gate was violated.
    #[error("acceptance gate failed: {0}")]
    Gate(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn compute(stage: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Compute {
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn parse(what: impl Into<String>, offset: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            offset,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable identifier for scripts and CI logs.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid { .. } => "E_INVALID",
            Error::Shape { .. } => "E_SHAPE",
            Error::NoCarrier { .. } => "E_NO_CARRIER",
            Error::Compute { .. } => "E_COMPUTE",
            Error::Parse { .. } => "E_PARSE",
            Error::Io { .. } => "E_IO",
            Error::Gate(_) => "E_GATE",
        }
    }

    /// Process exit code: 2 validation, 3 compute, 4 acceptance gate.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. } | Error::Shape { .. } | Error::Parse { .. } => 2,
            Error::NoCarrier { .. } | Error::Compute { .. } | Error::Io { .. } => 3,
            Error::Gate(_) => 4,
        }
    }
}

pub(crate) fn ensure(cond: bool, field: &str, message: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(field, message()))
    }
}
