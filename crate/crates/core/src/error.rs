use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("field width {0} is outside 1..=16")]
    FieldWidth(u32),
    #[error("value {value} is not an element of GF(2^{width})")]
    NotInField { value: u32, width: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error(
        "MDS matrix needs {needed} distinct evaluation points but GF(2^{width}) has {available}"
    )]
    FieldCapacity {
        needed: usize,
        width: u32,
        available: usize,
    },
    #[error("expected {expected} symbols, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} known positions, got {got}")]
    KnownCount { expected: usize, got: usize },
    #[error("known position {0} is out of range")]
    KnownPosition(usize),
    #[error("linear system is singular")]
    Singular,

    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid receiver: {0}")]
    InvalidReceiver(String),
    #[error("message index {index} is outside 1..={max}")]
    MessageOutOfRange { index: usize, max: usize },
    #[error("invalid decoding choice: {0}")]
    InvalidChoice(String),
    #[error("choice space has {count} choices, exceeding the budget of {budget}")]
    BudgetExceeded { count: String, budget: u64 },

    #[error("induced subgraph contains a cycle")]
    Cyclic,
    #[error("graph has {0} nodes; at most 64 are supported")]
    TooManyNodes(usize),
    #[error("naive enumeration is capped at {cap} nodes, graph has {nodes}")]
    NaiveCap { cap: usize, nodes: usize },
    #[error("node {0} is not in the graph")]
    UnknownNode(usize),

    #[error("outside hypothesis: {0}")]
    Hypothesis(String),
    #[error("falsification: {0}")]
    Falsification(String),
    #[error("scheme delivered {delivered} fresh messages to receiver {receiver}, needed {needed}")]
    Undelivered {
        receiver: String,
        delivered: usize,
        needed: usize,
    },
}
