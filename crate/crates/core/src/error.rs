use thiserror::Error;

use crate::basis::Outcome;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("two-qubit operation needs distinct qubits, got {0} twice")]
    SameQubit(usize),

    #[error("gate is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("register of {0} qubits exceeds the dense-representation limit")]
    CapacityExceeded(usize),

    #[error("amplitude array of length {0} is not a power of two")]
    InvalidAmplitudeCount(usize),

    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),

    #[error("degenerate branch {outcome}: probability {probability:e} has no conditional state")]
    DegenerateBranch { outcome: Outcome, probability: f64 },

    #[error("register sizes differ: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),

    #[error("operation needs at least two qubits in the register")]
    SingleQubitRegister,

    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("measurement basis is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid gate pattern: {0}")]
    InvalidPattern(String),

    #[error("pattern shape not reducible to elementary processes: {0}")]
    UnrecognizedPattern(String),

    #[error("exhaustive execution would need 2^{0} branches")]
    TooManyBranches(usize),

    #[error("numerical check failed: {0}")]
    CheckFailed(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("IO error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical check (bound violation, oracle
    /// mismatch) as opposed to bad input or IO.
    pub fn is_check_failure(&self) -> bool {
        matches!(self, Self::CheckFailed(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
