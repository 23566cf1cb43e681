use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot open git repository at {path}: {source}")]
    OpenRepository {
        path: PathBuf,
        #[source]
        source: git2::Error,
    },
    #[error("cannot resolve revision range '{range}': {source}")]
    BadRange {
        range: String,
        #[source]
        source: git2::Error,
    },
    #[error("unknown revision '{rev}'")]
    UnknownRevision { rev: String },
    #[error("git error: {0}")]
    Git(#[from] git2::Error),
    #[error("not a module descriptor: no module declaration found")]
    NotADescriptor,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("schema mismatch in {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
