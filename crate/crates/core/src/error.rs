use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate synset id `{0}`")]
    DuplicateSynset(String),

    #[error("`{0}` appears in more than one categorial-variation cluster")]
    DuplicateCluster(String),

    #[error("no nonzero count for `{0}`")]
    NoBirth(String),

    #[error("cannot fit model: no training vectors of class {0}")]
    Unfittable(u8),

    #[error("cycle of {cycle} years yields {periods} sampling periods; at least 4 are needed")]
    Schedule { cycle: u32, periods: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
