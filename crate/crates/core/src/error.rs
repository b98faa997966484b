use thiserror::Error;

use crate::linalg::SolveError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sizing error: {0}")]
    Sizing(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("{stage}: {source}")]
    Solver {
        stage: &'static str,
        #[source]
        source: SolveError,
    },
    #[error("step {step} ({stage}): {source}")]
    Step {
        step: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("non-finite field {field} after step {step}")]
    Blowup { step: usize, field: &'static str },
}

impl Error {
    pub(crate) fn at_step(self, step: usize, stage: &'static str) -> Self {
        Error::Step {
            step,
            stage,
            source: Box::new(self),
        }
    }
}
