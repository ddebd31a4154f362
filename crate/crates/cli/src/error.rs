use std::fmt;
use std::path::Path;

use annulus_core::Error;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Usage = 1,
    Numerical = 2,
    Io = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Usage,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            exit: Exit::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    /// Wraps a library error, classifying it and prefixing `context`.
    pub fn core(context: &str, err: Error) -> Self {
        let exit = match &err {
            Error::InvalidInput(_) | Error::Parse { .. } => Exit::Usage,
            Error::Io(_) => Exit::Io,
            Error::Csv(e) if e.is_io_error() => Exit::Io,
            Error::Csv(_) => Exit::Usage,
            _ => Exit::Numerical,
        };
        Self {
            exit,
            message: format!("{context}: {err}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a context string to library results.
pub trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for annulus_core::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        self.map_err(|e| CliError::core(what, e))
    }
}
