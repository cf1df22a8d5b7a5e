use thiserror::Error;

/// Errors raised by the simulation engines, models and protocols.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit count {got} outside supported range {min}..={max}")]
    Size { got: usize, min: usize, max: usize },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitIndex { index: usize, num_qubits: usize },

    #[error("two-qubit operation needs distinct qubits, got {0} twice")]
    SameQubit(usize),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("Kraus operators are not complete (deviation {deviation:.3e})")]
    IncompleteChannel { deviation: f64 },

    #[error("gate arity {got} does not match expected arity {expected}")]
    Arity { expected: usize, got: usize },

    #[error("{name} = {value} outside allowed range [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("size mismatch: {context} (expected {expected}, got {got})")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("bitstring entries must be 0 or 1")]
    InvalidBit,

    #[error("wrong instance mode: {0}")]
    Mode(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
