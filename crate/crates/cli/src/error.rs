use thiserror::Error;

/// Failure classes, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data failure: {0}")]
    Data(String),
    #[error("no admissible analysis: {0}")]
    NoAdmissible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::NoAdmissible(_) => 4,
        }
    }
}

impl From<mfa_core::Error> for CliError {
    fn from(e: mfa_core::Error) -> Self {
        use mfa_core::Error as E;
        match e {
            E::NoAdmissibleAnalysis(msg) => CliError::NoAdmissible(msg),
            E::SignalTooShort(_)
            | E::NonFiniteSample(_)
            | E::InsufficientScales(_)
            | E::Misaligned(_)
            | E::EmbeddingNotPsd(_) => CliError::Data(e.to_string()),
            E::TooManyLevels { .. }
            | E::UnsupportedWaveletOrder(_)
            | E::InvalidParameter { .. }
            | E::InvalidScaleRange { .. }
            | E::OversamplingInsufficient { .. }
            | E::Config(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
