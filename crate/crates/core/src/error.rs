//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A file could not be parsed; `line` is 1-based and counts the header.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    /// Input violated a documented contract.
    #[error("validation error: {0}")]
    Validation(String),

    /// Model training failed (degenerate corpus, diverging loss, ...).
    #[error("training error: {0}")]
    Training(String),

    /// An oracle returned something unusable; the message carries the raw reply.
    #[error("oracle error: {0}")]
    Oracle(String),

    /// The remote oracle connection failed.
    #[error("transport error: {0}")]
    Transport(String),

    /// An attack could not be applied (e.g. empty sentence pool).
    #[error("attack error: {0}")]
    Attack(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),

    /// Pipeline stage wrapper so experiment failures name the stage.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// CLI exit code: 1 for bad input, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) => 1,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
