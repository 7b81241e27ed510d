use thiserror::Error;

/// Errors produced while building, loading, or analysing chains.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state space is empty")]
    EmptyStateSpace,
    #[error("duplicate state label `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("negative probability on edge {0} -> {1}")]
    NegativeProbability(String, String),
    #[error("row of state `{0}` sums to {1}, expected 1")]
    RowSumNotOne(String, String),
    #[error("negative cost on edge {0} -> {1}")]
    NegativeCost(String, String),
    #[error("non-finite value on edge {0} -> {1}")]
    NonFinite(String, String),
    #[error("duplicate entry for edge {0} -> {1}")]
    DuplicateEntry(String, String),
    #[error("invalid number literal `{0}`")]
    InvalidNumber(String),
    #[error("model file: {0}")]
    Parse(String),
    #[error("start state `{0}` already lies in the target set")]
    StartInTarget(String),
    #[error("conditioning event has probability zero")]
    ConditionHasZeroProbability,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("probe index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("`{0}` is not an honest jondo")]
    NotHonestJondo(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("no sampled path was decided within the step horizon")]
    NoDecidedSamples,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
