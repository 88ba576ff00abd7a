use thiserror::Error;

/// Errors produced by the library and surfaced by the CLI with exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("Bloch coefficient has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("no threshold in range [{from}, {to}]: violation does not change sign")]
    NoThreshold { from: f64, to: f64 },

    #[error("evaluation failed at {param} = {value}: {source}")]
    Evaluation {
        param: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
