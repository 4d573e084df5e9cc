use std::fmt;
use std::path::Path;

use ndp_core::NdpError;

/// Exit status contract: 1 for domain and validation problems, 2 for I/O.
#[derive(Debug)]
pub enum CliError {
    Core(NdpError),
    Usage(String),
    /// An error tied to a named input file.
    File {
        path: String,
        source: NdpError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(NdpError::Io(_)) | CliError::File { source: NdpError::Io(_), .. } => 2,
            _ => 1,
        }
    }
}

impl CliError {
    pub fn at(path: &Path, e: std::io::Error) -> Self {
        Self::core_at(path, NdpError::Io(e))
    }

    pub fn core_at(path: &Path, e: NdpError) -> Self {
        CliError::File { path: path.display().to_string(), source: e }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(NdpError::Degenerate(msg)) => {
                write!(f, "degenerate batch: {msg}")
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::File { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl From<NdpError> for CliError {
    fn from(e: NdpError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(NdpError::Io(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;
