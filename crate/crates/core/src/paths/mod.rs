//! Directed paths, path collections and the events they define.

mod collection;
mod path;

pub use collection::{
    Certificate, CollectionKind, HoppabilityReport, HoppabilityWitness, PathCollection, DEFAULT_PATH_CAP,
};
pub use path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not a path: {0}")]
    NotAPath(String),
    #[error("collection exceeds the cap of {cap} paths")]
    TooManyPaths { cap: usize },
    #[error("path file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error reading paths: {0}")]
    Io(String),
}
