use std::path::PathBuf;

use reciprec_core::Error as CoreError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Usage = 1,
    Data = 2,
    Internal = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Usage(_) => ExitCode::Usage,
            AppError::Parse { .. } | AppError::Io { .. } => ExitCode::Data,
            AppError::Internal(_) => ExitCode::Internal,
            AppError::Core(e) => match e {
                CoreError::InvalidPenalty(_)
                | CoreError::InvalidParameter(_)
                | CoreError::Calibration(_) => ExitCode::Usage,
                CoreError::ModelMismatch { .. } | CoreError::IndexOutOfRange(_) => {
                    ExitCode::Internal
                }
                _ => ExitCode::Data,
            },
        }
    }
}
