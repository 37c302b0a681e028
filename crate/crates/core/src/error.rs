use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("NaN encountered in {0}")]
    NanInput(&'static str),

    #[error("adaptive integration did not converge after {intervals} subintervals (error estimate {error:e})")]
    IntegrationFailure { intervals: usize, error: f64 },

    #[error("nested quadrature would need {terms} terms (limit {limit})")]
    ComplexityLimit { terms: f64, limit: f64 },

    #[error("scenario field `{field}`: {reason}")]
    ScenarioValidation { field: String, reason: String },

    #[error("curve `{curve}` does not cross the target BER {target:e} inside its SNR grid")]
    TargetUnreachable { curve: String, target: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ScenarioValidation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
