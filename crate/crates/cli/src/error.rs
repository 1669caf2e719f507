use magtor_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("range coverage: {0}")]
    Coverage(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Coverage(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    /// Error mapper for core failures while validating one named field.
    pub(crate) fn precondition(what: &'static str) -> impl Fn(Error) -> CliError {
        move |e| match e {
            Error::InvalidGrid(_) | Error::InvalidField(_) | Error::Argument(_) => {
                CliError::Config(format!("{what}: {e}"))
            }
            other => CliError::Precondition(format!("{what}: {other}")),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_) | Error::InvalidField(_) | Error::Argument(_) => {
                CliError::Config(e.to_string())
            }
            Error::NotConvex { .. } => CliError::Precondition(e.to_string()),
            Error::Precondition(m) => CliError::Precondition(m),
            Error::RangeCoverage(m) => CliError::Coverage(m),
            Error::EndpointDerivative { .. } => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
