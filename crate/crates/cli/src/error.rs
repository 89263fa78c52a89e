use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: crgen_core::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    /// 0 success, 1 usage or parameter error, 2 resource budget, 3 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core {
                source: crgen_core::Error::BudgetExceeded { .. },
                ..
            } => 2,
            CliError::CheckFailed(_) => 3,
            _ => 1,
        }
    }
}

pub trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, crgen_core::Error> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: ctx(),
            source,
        })
    }
}
