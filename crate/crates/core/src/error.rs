use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("action {action} out of range for {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },

    #[error("state {0} has not been observed; local access forbids querying it")]
    IllegalLocalQuery(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("value {value} outside [0, {max}]")]
    OutOfRange { value: i64, max: i64 },

    #[error("weight sequence is not admissible: {0}")]
    InvalidSequence(String),

    #[error("invalid game query: {0}")]
    InvalidQuery(String),

    #[error("mdp does not expose an enumeration")]
    NotEnumerable,

    #[error("enumeration is not stage-ordered: state {from} leads to {to}")]
    NotStageOrdered { from: usize, to: usize },

    #[error("transition from state {0} is not deterministic")]
    NotDeterministic(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("planner state missing: {0}")]
    MissingPlannerState(&'static str),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
