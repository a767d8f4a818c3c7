use thiserror::Error;

/// Errors produced by Hamiltonian construction, simulation and evolution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("{n_qubits} qubits exceeds the dense-matrix limit of {limit}")]
    DenseLimit { n_qubits: usize, limit: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("orbital index {index} out of range for {n_orbitals} orbitals")]
    OrbitalOutOfRange { index: usize, n_orbitals: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("modulus {0} must be odd and at least 9")]
    InvalidModulus(u64),

    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("observable is not Hermitian (max imaginary coefficient {0:e})")]
    NonHermitian(f64),

    #[error("invalid Taylor order {0}; supported orders are 1, 2 and 3")]
    InvalidTaylorOrder(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
