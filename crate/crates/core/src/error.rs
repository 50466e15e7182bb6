use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probe {0} contains an identity coordinate; use an extended probe")]
    TrivialProbeCoordinate(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("batch holds {have} records but {need} are required")]
    BatchTooSmall { have: usize, need: usize },

    /// The support set outgrew its bound. This is the learner's failure
    /// event, not a bug.
    #[error("capacity exceeded in round {round}: {size} prefixes survive, bound is {capacity}")]
    CapacityExceeded {
        round: usize,
        size: usize,
        capacity: usize,
    },

    #[error("target must differ from the identity string; use the identity estimator")]
    IdentityTarget,

    #[error("batch contains measurement failures; this estimator needs a noiseless batch")]
    NoisyBatch,

    #[error("batch probes are {found}, expected {expected}")]
    WrongProbeFamily {
        expected: &'static str,
        found: &'static str,
    },

    #[error("{n} qubits exceeds the dense limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("Kraus operators are not complete: deviation {0:e}")]
    IncompleteChannel(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub(crate) fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}
