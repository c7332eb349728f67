use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis index {index} out of range for {n_qubits} qubit(s)")]
    BasisIndexOutOfRange { index: usize, n_qubits: usize },

    #[error("unsupported qubit count {0} (expected 1 or 2)")]
    UnsupportedQubitCount(usize),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid targets {targets:?} for a {n_qubits}-qubit register")]
    BadTargets { targets: Vec<usize>, n_qubits: usize },

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("Pauli string length {actual} does not match {expected} qubit(s)")]
    PauliLengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("twirl enumeration refused: {0} hard gates exceeds the limit of 2")]
    TooManyHardGates(usize),

    #[error("cannot sample {requested} items from a list of {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("malformed circuit text at line {line}: {message}")]
    CircuitParse { line: usize, message: String },

    #[error(transparent)]
    Ingest(#[from] crate::charfit::IngestError),
}
