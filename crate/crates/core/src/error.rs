use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("length mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },
    #[error("gate {0:?} is not a unitary Clifford gate")]
    NotUnitary(crate::circuit::GateKind),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("qubit {0} used after its terminal measurement")]
    MeasuredQubit(usize),
    #[error("blocks overlap on wire {0}")]
    OverlappingBlocks(usize),
    #[error("frame has support outside the code block (qubit {0})")]
    OutsideBlock(usize),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("leaf {0} has already been consumed")]
    LeafConsumed(usize),
    #[error("no accepted trials out of {0}")]
    ZeroAccepted(u64),
    #[error("no L <= {max} reaches the failure target {target}")]
    NoLeafCount { max: usize, target: f64 },
    #[error("kappa undefined for q = {0} (requires 0 < q < 0.25)")]
    KappaUndefined(f64),
    #[error("invalid counts: {successes} successes out of {trials} trials")]
    InvalidCounts { successes: u64, trials: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
