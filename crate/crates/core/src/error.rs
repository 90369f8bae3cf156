use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unknown register segment `{0}`")]
    UnknownSegment(String),
    #[error("duplicate register segment `{0}`")]
    DuplicateSegment(String),
    #[error("invalid register layout: {0}")]
    InvalidLayout(String),
    #[error("source and destination segments overlap at `{0}`")]
    OverlappingSegments(String),
    #[error("state would hold {terms} terms, over the cap of {cap}")]
    TermCapExceeded { terms: usize, cap: usize },
    #[error("Hadamard weight {weight} exceeds the cap of {cap}")]
    HadamardCapExceeded { weight: usize, cap: usize },
    #[error("difference-space rank {rank} exceeds r_max = {r_max}")]
    RankExceeded { rank: usize, r_max: usize },
    #[error("dense oracle limited to {limit} bits, state has {bits}")]
    DenseLimit { bits: usize, limit: usize },
    #[error("segment `{0}` is not in a single computational basis state")]
    NotDefinite(String),
    #[error("measurement outcome has zero probability")]
    ZeroProbability,
    #[error("layouts differ")]
    LayoutMismatch,
    #[error("unknown handle {0}")]
    UnknownHandle(u64),
    #[error("authentication failed")]
    Authentication,
    #[error("slot index {index} out of range for {slots} slots")]
    SlotOutOfRange { index: usize, slots: usize },
    #[error("expected {expected} keys, got {actual}")]
    Arity { expected: usize, actual: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
