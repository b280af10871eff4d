use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while constructing domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("unknown {kind} `{value}`")]
    UnknownName { kind: &'static str, value: String },
    #[error("agent {id}: illegal state transition {from:?} -> {to:?}")]
    Transition {
        id: String,
        from: crate::model::AgentState,
        to: crate::model::AgentState,
    },
    #[error("invalid cost range [{lo}, {hi}]")]
    CostRange { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("{mode} network: unknown node `{id}`")]
    UnknownNode { mode: crate::model::Mode, id: String },
    #[error("{mode} network: duplicate node `{id}`")]
    DuplicateNode { mode: crate::model::Mode, id: String },
    #[error("{mode} network: edge {from}-{to} has non-positive length {miles}")]
    EdgeLength {
        mode: crate::model::Mode,
        from: String,
        to: String,
        miles: f64,
    },
    #[error("truck is not a line-haul mode and has no network")]
    TruckNetwork,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("start year {start} precedes route availability {available}")]
    StartBeforeAvailable { start: i32, available: i32 },
    #[error("captured tonnage must be positive, got {0}")]
    NonPositiveTonnage(f64),
}

/// Failures reading or writing the CSV/JSON file formats.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}:{line}: column `{column}`: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Network {
        path: PathBuf,
        #[source]
        source: NetworkError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
}

/// Crate-level error used by the engine and experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Output { .. })
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Output {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
