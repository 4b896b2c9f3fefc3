//! CLI error classification and exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparsable, or semantically invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Forward-solver failure.
    #[error("solver error: {0}")]
    Solver(rtm2d_core::Error),

    /// Artifact I/O failure.
    #[error("i/o error: {0}")]
    Io(rtm2d_core::Error),

    /// One or more identity checks failed.
    #[error("{failed} of {total} identity checks failed")]
    IdentityFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Solver(_) => 2,
            Self::Io(_) => 3,
            Self::IdentityFailed { .. } => 4,
        }
    }
}

impl From<rtm2d_core::Error> for CliError {
    fn from(e: rtm2d_core::Error) -> Self {
        use rtm2d_core::Error as E;
        match &e {
            E::Io { .. } | E::Metadata { .. } | E::Format(_) => Self::Io(e),
            _ => Self::Solver(e),
        }
    }
}
