use std::path::PathBuf;

use mbl_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("toml: {0}")]
    TomlParse(#[from] toml::de::Error),
    #[error("toml: {0}")]
    TomlWrite(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Other = 1,
    Config = 2,
    Capacity = 3,
    Numerical = 4,
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ExitKind {
        match self {
            LabError::Config(_) | LabError::TomlParse(_) => ExitKind::Config,
            LabError::Core(e) => match e {
                CoreError::Capacity { .. } => ExitKind::Capacity,
                CoreError::NonConvergence { .. }
                | CoreError::KrylovStep { .. }
                | CoreError::NoFiniteBeta { .. } => ExitKind::Numerical,
                _ => ExitKind::Config,
            },
            _ => ExitKind::Other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind() as i32
    }
}
