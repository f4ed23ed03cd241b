use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{message}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] relhyp_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "PARSE_ERROR",
            CliError::Validation(_) => "VALIDATION_ERROR",
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "IO_ERROR",
            CliError::Csv(_) => "IO_ERROR",
        }
    }

    /// 2 when a hypothesis of the construction fails, 3 on a resource cap,
    /// 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(relhyp_core::Error::NotMalnormal { .. } | relhyp_core::Error::NotProper) => 2,
            CliError::Core(relhyp_core::Error::ResourceLimit { .. }) => 3,
            _ => 1,
        }
    }
}
