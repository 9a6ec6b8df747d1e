use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("hypergraph has no hyperedges")]
    EmptyHypergraph,

    #[error("invalid hyperedge: {0}")]
    InvalidEdge(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("zero degree for {0}")]
    ZeroDegree(String),

    #[error("restriction keeps no hyperedges")]
    EmptyRestriction,

    #[error("hypergraph is not connected")]
    Disconnected,

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("invalid size bins `{spec}`: {msg}")]
    InvalidBins { spec: String, msg: String },

    #[error("row {row} is not a probability distribution (sum = {sum})")]
    NotNormalized { row: usize, sum: f64 },

    #[error("requested {requested} steps but only {available} were estimated")]
    StepsUnavailable { requested: usize, available: usize },

    #[error("power iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("distribution is not stationary: residual {0:e}")]
    NotStationary(f64),

    #[error("empty score list")]
    EmptyScores,

    #[error("exponential fit failed: {0}")]
    FitFailure(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::NotStationary(_)
                | Error::FitFailure(_)
                | Error::DegenerateRegression(_)
                | Error::ZeroDegree(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
