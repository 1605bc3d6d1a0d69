use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("validity guard: {0}")]
    Guard(catbell::Error),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("optimizer did not converge from any of {starts} starts")]
    NotConverged { starts: usize },
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error(transparent)]
    Model(catbell::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Io { .. } => 4,
            CliError::NotConverged { .. } => 5,
            CliError::VerifyFailed(_) | CliError::Model(_) => 6,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<catbell::Error> for CliError {
    fn from(e: catbell::Error) -> Self {
        use catbell::Error as E;
        match e {
            E::InvalidConfig(m) => CliError::Config(m),
            E::InvalidBounds(m) => CliError::Usage(m),
            E::BeforeTransit { .. } | E::ZeroTime => CliError::Guard(e),
            other => CliError::Model(other),
        }
    }
}
