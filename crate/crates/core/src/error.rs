use alloc::string::String;

use crate::sequence::ParseError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// Degenerate data or a singular design matrix.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("integration step too large: trace drifted by {drift:e}")]
    StepSize { drift: f64 },

    /// Two-point readout ratio outside `[0, 2]`.
    #[error("inconsistent trace: signal ratio {ratio} is outside [0, 2]")]
    InconsistentTrace { ratio: f64 },

    #[error("tau grid is not uniform")]
    NonUniformGrid,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn fit(msg: impl Into<String>) -> Self {
        Error::Fit(msg.into())
    }
}
