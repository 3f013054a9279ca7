use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("scenario `{name}`: {source}")]
    Scenario {
        name: String,
        source: ams_core::Error,
    },
    #[error("scenario `{name}` failed: {source}")]
    Run {
        name: String,
        source: ams_core::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl ExpError {
    /// 2 for anything wrong with the inputs, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Read { .. } | ExpError::Config(_) | ExpError::Scenario { .. } => 2,
            ExpError::Write { .. } | ExpError::Run { .. } | ExpError::Failed(_) => 1,
        }
    }
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;
