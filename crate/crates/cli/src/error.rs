use std::path::PathBuf;

use branchlab_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scenario schema: {0}")]
    Schema(String),
    #[error("{command}: {source}")]
    Core {
        command: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn core(command: &'static str) -> impl FnOnce(CoreError) -> CliError {
        move |source| CliError::Core { command, source }
    }

    /// 0 ok, 1 other failure, 2 bad input, 3 cap or budget exceeded,
    /// 4 precondition violated.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Schema(_) => 2,
            CliError::Core { source, .. } => match source {
                CoreError::Empty
                | CoreError::NegativeWeight { .. }
                | CoreError::NotNormalized { .. } => 2,
                CoreError::CapExceeded { .. } | CoreError::SearchBudgetExceeded(_) => 3,
                CoreError::SameDistribution | CoreError::DimensionMismatch { .. } => 4,
                _ => 1,
            },
            CliError::Io { .. } => 1,
        }
    }
}
