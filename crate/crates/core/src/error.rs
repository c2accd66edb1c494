use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("database is empty")]
    Empty,

    #[error("need at least {required} observations, got {actual}")]
    TooFewObservations { required: usize, actual: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid bounds: xmin ({xmin}) must be strictly less than xmax ({xmax})")]
    InvalidBounds { xmin: f64, xmax: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quantile rank {rank} outside 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },

    #[error("evaluation point {y} outside [{xmin}, {xmax})")]
    OutsideBounds { y: f64, xmin: f64, xmax: f64 },

    #[error("parameter `{param}` does not apply to method {method}")]
    NotApplicable { param: &'static str, method: &'static str },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True when the error is caused by a database that is too small for the
    /// requested method, rather than by a malformed argument.
    pub fn is_insufficient_data(&self) -> bool {
        matches!(self, Error::Empty | Error::TooFewObservations { .. })
    }
}

pub(crate) fn require_len(values: &[f64], required: usize) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if values.len() < required {
        return Err(Error::TooFewObservations { required, actual: values.len() });
    }
    Ok(())
}
