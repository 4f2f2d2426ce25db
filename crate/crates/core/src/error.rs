use thiserror::Error;

/// Errors raised by the simulation, operator, optimization and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("parameter slot {slot} unresolved (parameter vector has {len} entries)")]
    UnresolvedParameter { slot: usize, len: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("amplitude buffer of length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("invalid bipartition: {0}")]
    InvalidCut(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate disorder draw: sites {0} and {1} coincide")]
    CoincidentSites(usize, usize),

    #[error("invalid symmetry sector: {0}")]
    InvalidSector(String),

    #[error("symmetry sector is empty")]
    EmptySector,

    #[error("dimension {dim} exceeds dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),

    #[error("invalid cost configuration: {0}")]
    InvalidCost(String),

    #[error("invalid training configuration: {0}")]
    InvalidTrainConfig(String),

    #[error("non-finite cost at iteration {iteration}")]
    NonFiniteCost { iteration: usize },

    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("state leaks out of the diagonalized space (leakage {0:e})")]
    Leakage(f64),

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("invalid scan configuration: {0}")]
    InvalidScan(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
