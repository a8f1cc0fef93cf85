use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// A configuration or value violates a named invariant.
    #[error("invariant violated: {0}")]
    Validation(String),

    #[error("position {x} outside screen window [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("sampler failed: {0}")]
    Sampling(String),
}

impl SimError {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        SimError::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
