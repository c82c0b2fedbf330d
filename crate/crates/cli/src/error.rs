use omaf_core::codec::CodecError;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Process exit code. The values are a stable contract for scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus(pub u8);

impl ExitStatus {
    pub const OK: Self = Self(0);
    /// Validation or conformance failures were found.
    pub const FAILURES: Self = Self(1);
    pub const USAGE: Self = Self(2);
    /// I/O or parse error.
    pub const INPUT: Self = Self(3);
}

impl fmt::Display for ExitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    /// The input was read fine but the requested operation found problems.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::USAGE,
            CliError::Io { .. } | CliError::Parse { .. } => ExitStatus::INPUT,
            CliError::Failed(_) => ExitStatus::FAILURES,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, message: impl fmt::Display) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }

    /// Codec errors are input errors, except a presentation that is
    /// well-formed but fails validation.
    pub fn codec(path: &Path, e: CodecError) -> Self {
        match e {
            CodecError::Invalid(report) => CliError::Failed(format!("{}: {report}", path.display())),
            other => CliError::parse(path, other),
        }
    }
}
