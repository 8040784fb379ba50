use thiserror::Error;

use crate::keys::PartyId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("message must contain at least one qubit")]
    EmptyMessage,

    #[error("qubit {index} is not normalized: |alpha|^2 + |beta|^2 = {norm_sq}")]
    NonNormalizedQubit { index: usize, norm_sq: f64 },

    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("amplitude vector has length {len}, expected a power of two")]
    BadStateLength { len: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("control and target are both qubit {0}")]
    ControlEqualsTarget(usize),

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{num_qubits} qubits exceeds the simulator limit of {limit}")]
    TooManyQubits { num_qubits: usize, limit: usize },

    #[error("shot count must be at least one")]
    ZeroShots,

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid bit string {0:?}")]
    InvalidBits(String),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("lambda {value} at position {index} is outside [0, pi]")]
    LambdaOutOfRange { index: usize, value: f64 },

    #[error("{operation} called with a {actual} context")]
    ContextMismatch {
        operation: &'static str,
        actual: &'static str,
    },

    #[error("key for {purpose} from {sender} to {receiver} already delivered")]
    DuplicateDelivery {
        sender: PartyId,
        receiver: PartyId,
        purpose: &'static str,
    },

    #[error("unknown party {0}")]
    UnknownParty(PartyId),

    #[error("no signing secret registered for {0}")]
    MissingLambda(PartyId),

    #[error("no signature proof stored for {0}")]
    NoProofStored(PartyId),

    #[error("channel {channel} does not exist under {wiring} wiring or cannot carry {what}")]
    InvalidChannel {
        channel: &'static str,
        wiring: &'static str,
        what: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
