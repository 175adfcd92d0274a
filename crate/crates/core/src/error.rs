use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The pre-renormalization trace moved too far from one in a single step.
    #[error("step size too large: trace drifted to {trace:.6} at step {step} (dt = {dt})")]
    StepSize { step: u64, trace: f64, dt: f64 },

    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: u64, what: String },

    #[error("ratio undefined for |{x:03b}> and |{y:03b}>: equal dispersive shifts")]
    UndefinedRatio { x: usize, y: usize },

    #[error("Fock truncation breached: population {population:.3e} in the top two of {n_fock} levels")]
    Truncation { n_fock: usize, population: f64 },

    #[error("{failed} of {total} trajectories failed (first: {first})")]
    EnsembleFailure {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
