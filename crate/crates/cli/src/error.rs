use std::fmt;
use std::path::{Path, PathBuf};

use spatial_qubits::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Lib(Error),
    Numerical(String),
    /// A computed quantity fell outside its acceptance bound.
    Bound(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e {
                Error::Quadrature { .. } | Error::ZeroMatrix | Error::DegenerateSettings { .. } => 3,
                _ => 2,
            },
            CliError::Numerical(_) => 3,
            CliError::Bound(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Prefixes a library error with the file it came from.
    pub fn in_file(path: &Path, e: Error) -> Self {
        match e {
            Error::Format(msg) => CliError::Lib(Error::Format(format!("{}: {msg}", path.display()))),
            other => CliError::Lib(other),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Bound(m) => write!(f, "bound violated: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io { path: PathBuf::from("<csv>"), source: io },
            other => CliError::Usage(format!("csv: {other:?}")),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
