use std::path::PathBuf;

/// Errors produced by the restoration toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Utf8 { offset: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("wordkey {0:?} has no candidate variants")]
    UnknownWordkey(String),

    #[error("degenerate training data: {0}")]
    Degenerate(String),

    #[error("{0}")]
    EmptyModel(String),

    #[error("no candidate of wordkey {0:?} has a vector")]
    Unrepresentable(String),

    #[error("cannot build {k} folds from {n} instances")]
    Folds { k: usize, n: usize },

    #[error("empty confusion matrix")]
    EmptyMatrix,

    #[error("line {line}: restored text has {restored} tokens, gold has {gold}")]
    Alignment { line: usize, restored: usize, gold: usize },

    #[error("model: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
