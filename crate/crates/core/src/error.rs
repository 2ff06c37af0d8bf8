use thiserror::Error;

/// Errors produced by the simulator and its analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("could not generate a connected topology after {attempts} attempts (parameters too sparse)")]
    NotConnected { attempts: usize },

    #[error("combination matrix is not primitive (strong connectivity with a self-loop is required)")]
    NotPrimitive,

    #[error("state space too large: {requested} agents exceeds the cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("bound undefined: {0}")]
    UndefinedBound(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("estimate diverged at iteration {iteration} (agent {agent}, norm {norm:e})")]
    Diverged {
        iteration: usize,
        agent: usize,
        norm: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } | Error::Numerical(_) => 3,
            Error::Io(_) | Error::Csv(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
