use std::fmt::Display;

use thiserror::Error;

/// Failures grouped by process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
        }
    }

    /// Prefix the message, keeping the exit code.
    pub fn context(self, ctx: impl Display) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{ctx}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{ctx}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{ctx}: {m}")),
        }
    }
}

impl From<isc_core::Error> for CliError {
    fn from(e: isc_core::Error) -> Self {
        use isc_core::Error as E;
        match e {
            E::Io(io) => CliError::Io(io.to_string()),
            e @ (E::Config(_) | E::Domain { .. } | E::Empty(_)) => CliError::Usage(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let io = isc_core::Error::Io(std::io::Error::other("gone"));
        assert_eq!(CliError::from(io).code(), 2);
        assert_eq!(CliError::from(isc_core::Error::Empty("x")).code(), 1);
        assert_eq!(CliError::from(isc_core::Error::Parse("x".into())).code(), 3);
        assert_eq!(CliError::Validation("v".into()).context("file").to_string(), "file: v");
    }
}
