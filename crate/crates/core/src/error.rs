use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A block lies outside the domain of a partial function.
    #[error("infeasible instance: block {block} ({bits}) is outside the domain of {function}")]
    Infeasible {
        block: usize,
        bits: String,
        function: String,
    },

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("exact enumeration exceeded the branch cap ({cap}); use sampled mode instead")]
    CapExceeded { cap: usize },

    #[error("domain of 2^{bits} inputs is too large (limit 2^{limit})")]
    DomainTooLarge { bits: usize, limit: usize },

    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The confusion-triple search failed: the algorithm distinguishes f at this stage.
    #[error("adversary failed at stage {stage}: {reason}")]
    AdversaryFailed { stage: usize, reason: String },

    #[error("block pool: {0}")]
    Pool(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
