use thiserror::Error;

/// Errors raised by the model, integrators and measures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate drive: Delta = Omega = 0 leaves the dressed basis undefined")]
    DegenerateDrive,

    #[error("negative time {0} (rates are defined for t >= 0)")]
    NegativeTime(f64),

    #[error("rate pole at t = {t} (denominator {denominator:e})")]
    Pole { t: f64, denominator: f64 },

    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("numeric instability: {0}")]
    NumericInstability(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. } | Error::IntegrationFailure { .. } | Error::NumericInstability(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
