use std::fmt;
use std::path::Path;

/// Command failure, classified by process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unknown measure names. Exit code 1.
    Usage(String),
    /// Unreadable, unwritable or malformed files and configs. Exit code 2.
    Data(String),
    /// A library contract on numeric inputs was violated. Exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    /// Wraps a library error that came from reading `path`.
    pub(crate) fn in_file(path: &Path, err: ctflux::Error) -> Self {
        match CliError::from(err) {
            CliError::Numeric(msg) | CliError::Data(msg) | CliError::Usage(msg) => {
                CliError::Data(format!("{}: {msg}", path.display()))
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ctflux::Error> for CliError {
    fn from(err: ctflux::Error) -> Self {
        match err {
            ctflux::Error::Parse { .. } | ctflux::Error::Io(_) => CliError::Data(err.to_string()),
            _ => CliError::Numeric(err.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
