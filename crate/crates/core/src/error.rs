use std::path::PathBuf;

use thiserror::Error;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lexicon file {path:?} is unreadable: {source}")]
    MissingLexicon {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path:?}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("unknown token id {token_id} (vocabulary size {vocab_size}) in document {doc_id}")]
    UnknownToken {
        token_id: u32,
        vocab_size: usize,
        doc_id: String,
    },

    #[error(
        "degenerate likelihood: every document has identical likelihood under both references, \
         the mixture proportion is unidentifiable"
    )]
    DegenerateLikelihood,

    #[error("stratum {name:?} is empty")]
    EmptyStratum { name: String },

    #[error("metadata key {key:?} missing on document {doc_id}")]
    UnknownMetadataKey { key: String, doc_id: String },

    #[error("invalid predicate: {0}")]
    InvalidPredicate(String),

    #[error("leakage: {overlap} validation document(s) appear in the training manifest (e.g. {example_id:?})")]
    Leakage { overlap: usize, example_id: String },

    #[error("model fingerprint mismatch: expected {expected}, got {actual}")]
    FingerprintMismatch { expected: String, actual: String },

    #[error("auth error: {0}")]
    Auth(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
