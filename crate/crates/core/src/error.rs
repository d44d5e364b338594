use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("taxonomy: {0}")]
    Taxonomy(String),

    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),

    #[error("unknown value `{0}`")]
    UnknownValue(String),

    #[error("unknown subvalue `{0}`")]
    UnknownSubvalue(String),

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("k = {k} exceeds ranking length {len}")]
    KTooLarge { k: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("panel: {0}")]
    Panel(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("Kemeny solver supports at most {max} values, got {n}")]
    TooManyValues { n: usize, max: usize },

    #[error("sentence at bytes {start}..{end} needs {tokens} tokens, over the {budget}-token budget")]
    OversizedSpan {
        start: usize,
        end: usize,
        tokens: usize,
        budget: usize,
    },

    #[error("prompt: {0}")]
    Prompt(String),

    #[error("endpoint: {0}")]
    Endpoint(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
