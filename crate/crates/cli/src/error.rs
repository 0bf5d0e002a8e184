use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] bopi_core::Error),
}

impl CliError {
    /// 1 usage or configuration, 2 data, 3 verification failure.
    pub fn exit_code(&self) -> u8 {
        use bopi_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Verify(_) => 3,
            CliError::Core(e) => match e {
                E::Config(_) | E::Domain(_) | E::NeighborCount { .. } => 1,
                E::Data(_) | E::Empty(_) | E::LengthMismatch { .. } | E::Singular(_) | E::Convergence { .. } => 2,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
