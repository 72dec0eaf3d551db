use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<fermidicke::Error> for CliError {
    fn from(e: fermidicke::Error) -> Self {
        use fermidicke::Error as E;
        match e {
            E::InvalidStatistics(_)
            | E::Capacity { .. }
            | E::IndexOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidParameter(_)
            | E::NoRadiationMode
            | E::NotOrthonormal { .. } => Self::Usage(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Usage(format!("config: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
