use thiserror::Error;

/// Errors raised anywhere in the learning pipeline.
///
/// Each variant corresponds to one failure class so that front ends can map
/// them onto distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("clause error: {0}")]
    Clause(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Re-tags a line-numbered error with a file name for diagnostics.
    pub fn in_file(self, file: &str) -> Self {
        match self {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{file}: {msg}"),
            },
            Error::Schema(m) => Error::Schema(format!("{file}: {m}")),
            Error::Io(m) => Error::Io(format!("{file}: {m}")),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
