use std::process::ExitCode;

/// Failure of a command, classified by the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0:#}")]
    Config(anyhow::Error),
    #[error("data error: {0:#}")]
    Data(anyhow::Error),
    #[error("results error: {0:#}")]
    Results(anyhow::Error),
    #[error("output error: {0:#}")]
    Output(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Results(_) => 4,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    /// Core errors raised while loading or evaluating data. Configuration
    /// problems keep their own code.
    pub fn from_core(e: posnb_core::Error) -> Self {
        match e {
            posnb_core::Error::Config(_) => CliError::Config(e.into()),
            other => CliError::Data(other.into()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn config(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(anyhow::anyhow!("{msg}"))
}

pub(crate) fn data(msg: impl std::fmt::Display) -> CliError {
    CliError::Data(anyhow::anyhow!("{msg}"))
}

pub(crate) fn results(msg: impl std::fmt::Display) -> CliError {
    CliError::Results(anyhow::anyhow!("{msg}"))
}

pub(crate) fn output(path: &std::path::Path, e: impl Into<anyhow::Error>) -> CliError {
    CliError::Output(e.into().context(format!("writing {}", path.display())))
}
