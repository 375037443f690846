use std::path::PathBuf;

use thiserror::Error;

use crate::dsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
    #[error("metric not positive definite at {point:?}: {detail}")]
    NotPositiveDefinite { point: Vec<f64>, detail: String },
    #[error("point {point:?} outside chart: {detail}")]
    OutOfChart { point: Vec<f64>, detail: String },
    #[error("geodesic integration failed: {0}")]
    Geodesic(String),
    #[error("normal chart: {0}")]
    Shooting(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    /// Whether the failure stems from user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Config(_) | Error::Io { .. } | Error::Invalid(_))
    }

    pub(crate) fn config(msg: impl Into<String>) -> Error {
        Error::Config(msg.into())
    }
}
