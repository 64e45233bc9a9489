use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular linear map (det = {0})")]
    SingularMap(f64),

    #[error("bodies were built on different sphere quadratures")]
    QuadratureMismatch,

    #[error("non-positive radial function at node {node}")]
    NonPositiveRadius { node: usize },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
