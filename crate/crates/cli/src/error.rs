use std::path::PathBuf;

use tenantshare_core::Error as CoreError;

/// Failures of the experiment runner, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The config is unreadable as TOML or fails validation.
    #[error("invalid config: {0}")]
    Config(String),

    /// A runtime invariant failed while simulating.
    #[error("invariant violated: {0}")]
    Runtime(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub const EXIT_CONFIG: u8 = 1;
    pub const EXIT_RUNTIME: u8 = 2;
    pub const EXIT_IO: u8 = 3;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Runtime(_) => Self::EXIT_RUNTIME,
            CliError::Io { .. } => Self::EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Classifies an error raised while a simulation is running.
    pub(crate) fn runtime(context: &str, e: CoreError) -> Self {
        match e {
            CoreError::Io { path, source } => CliError::Io { path, source },
            CoreError::Invariant(_) | CoreError::SourceExhausted { .. } | CoreError::InfeasibleDual(_) => {
                CliError::Runtime(format!("{context}: {e}"))
            }
            other => CliError::Config(format!("{context}: {other}")),
        }
    }
}
