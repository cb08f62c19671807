use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] lunar3b::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Exit status for malformed invocations; kept apart from the numerical codes 1 and 2.
pub const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_precision() => 2,
            CliError::Core(_) => 1,
            CliError::Io { .. } => EXIT_IO,
        })
    }
}
