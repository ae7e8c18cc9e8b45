use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the satellite control toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate orbit: position and velocity are collinear")]
    DegenerateOrbit,

    #[error("quaternion component {component} = {value} exceeds unit magnitude")]
    QuaternionRange { component: usize, value: f64 },

    #[error("numerical failure at t = {time:.3} s (last finite state at t = {last_good:.3} s): {reason}")]
    Numerical {
        time: f64,
        last_good: f64,
        reason: String,
    },

    #[error("value iteration produced NaN at stage {stage}, cell ({i}, {j})")]
    ValueNaN { stage: usize, i: usize, j: usize },

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (as opposed to numerical breakdown).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical { .. } | Error::ValueNaN { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
