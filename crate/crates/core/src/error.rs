use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integration diverged at t = {time}: non-finite state")]
    IntegrationDiverged { time: f64 },

    #[error("time {t} is outside the horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("oracle failed for input #{input} at time #{time}: {source}")]
    Oracle {
        input: usize,
        time: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("basis function {basis} is not finite at input #{input}, time #{time}")]
    ModelDomain {
        input: usize,
        time: usize,
        basis: usize,
    },

    #[error(
        "insufficient samples: {what} requires at least {required} but {provided} were provided"
    )]
    InsufficientSamples {
        what: &'static str,
        required: u64,
        provided: u64,
    },

    #[error("simplex stalled after {iterations} iterations")]
    SolverStall { iterations: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error(
        "linear program is infeasible under the configured bounds (best achievable xi = {best_xi})"
    )]
    BoundInfeasible { best_xi: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
