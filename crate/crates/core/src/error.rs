use std::io;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },

    #[error("gate is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("{qubits} qubits exceeds the dense limit of {limit}")]
    SizeOverCap { qubits: usize, limit: usize },

    #[error("observables {first} and {second} do not commute")]
    NonCommuting { first: String, second: String },

    #[error("targets are infeasible: {0}")]
    Infeasible(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Io(io::Error::other(err))
        } else {
            Error::Parse(err.to_string())
        }
    }
}

impl Error {
    /// Process exit code for the command-line tool: 2 validation, 3 numerical, 4 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::IndexOutOfRange { .. }
            | Error::NonUnitary { .. }
            | Error::SizeOverCap { .. }
            | Error::NonCommuting { .. }
            | Error::Parse(_) => 2,
            Error::Infeasible(_) | Error::NonFinite(_) | Error::EstimationFailure(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
