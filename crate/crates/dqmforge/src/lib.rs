//! JSON file formats, report emitters, parallel runners and the
//! command-line driver built on `dqmforge-core`.

use std::path::PathBuf;

pub mod cli;
pub mod experiment;
pub mod formats;
pub mod modes;
pub mod report;
pub mod runner;

pub use dqmforge_core as core;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dqmforge_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
