use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("invalid layered state space: {0}")]
    InvalidStateSpace(String),

    #[error("function class is empty")]
    EmptyClass,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("policy cache for context {context} does not match the estimator history")]
    InconsistentCache { context: usize },

    #[error("estimator history has {available} entries, stage {stage} needs {needed}")]
    HistoryTooShort {
        stage: usize,
        needed: usize,
        available: usize,
    },

    #[error("context index {context} out of range ({num_contexts} contexts)")]
    ContextOutOfRange { context: usize, num_contexts: usize },

    #[error("no run records")]
    EmptyRecords,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
