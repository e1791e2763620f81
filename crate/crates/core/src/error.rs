use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} {index} is outside the available range (max {max})")]
    Range {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("enumeration budget exceeded: n = {n}, budget allows n <= {budget}")]
    Budget { n: usize, budget: usize },

    #[error("pair is not in the image of the encoding: {0}")]
    NotInImage(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed cache {path}, line {line}: {reason}")]
    MalformedCache {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
