use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("invalid qubit pair ({0}, {1})")]
    InvalidQubitPair(usize, usize),

    #[error("{n_qubits} qubits exceeds the memory guard of {limit}")]
    TooManyQubits { n_qubits: usize, limit: usize },

    #[error("invalid Pauli term: {0}")]
    InvalidTerm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter vector has length {actual}, ansatz expects {expected}")]
    ParameterCount { expected: usize, actual: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("spectrum problem: {0}")]
    Spectrum(String),

    #[error("no soliton lattice: {0}")]
    NoSoliton(String),

    #[error("non-finite objective value during {0}")]
    NonFinite(&'static str),

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("concurrence evaluation failed: {0}")]
    Concurrence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
