use qspeed_core::{AnalysisError, ModelError, SpeedError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure at {param} = {at}: {message}")]
    Numerical { param: String, at: f64, message: String },
    #[error("numerical failure: {0}")]
    NumericalUnlocated(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical { .. } | CliError::NumericalUnlocated(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Numerical failure located at `param = at`.
    pub fn from_speed(err: SpeedError, param: &str, at: f64) -> Self {
        match err {
            SpeedError::Metric(m) => CliError::Usage(m.to_string()),
            other => {
                let (param, at) = match other.time() {
                    Some(t) if param != "t" => (format!("t = {t}, {param}"), at),
                    Some(t) => ("t".to_string(), t),
                    None => (param.to_string(), at),
                };
                CliError::Numerical { param, at, message: other.to_string() }
            }
        }
    }
}

impl From<SpeedError> for CliError {
    fn from(err: SpeedError) -> Self {
        CliError::from_speed(err, "parameter", f64::NAN)
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::Divergence(_) | ModelError::Linalg(_) => CliError::NumericalUnlocated(err.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(err: AnalysisError) -> Self {
        match err {
            AnalysisError::RootNotFound { .. } => CliError::NumericalUnlocated(err.to_string()),
            AnalysisError::Model(m) => m.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}
