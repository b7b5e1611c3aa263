//! Command-line front end for the one-epoch planning library: file
//! formats, JSON reports, and the subcommand implementations behind the
//! `onepass` binary.

use std::fmt;
use std::io;
use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;

pub use commands::{run, Cli};

/// Exit code 2: bad invocation or malformed input files.
/// Exit code 3: an analysis that ran and failed.
#[derive(Debug)]
pub enum CliError {
    Core(onepass_core::Error),
    Io { path: PathBuf, source: io::Error },
    Format { path: PathBuf, message: String },
    Usage(String),
}

impl CliError {
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 3,
            _ => 2,
        }
    }

    pub fn error_code(&self) -> &str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
            CliError::Usage(_) => "usage",
        }
    }

    /// Analysis failures print a machine-readable JSON object; input
    /// problems print a plain usage-style message.
    pub fn print_to_stderr(&self) {
        if self.exit_code() == 3 {
            let obj = serde_json::json!({
                "error": { "code": self.error_code(), "message": self.to_string() }
            });
            eprintln!("{obj}");
        } else {
            eprintln!("error: {self}");
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Format { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(message) => f.write_str(message),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Core(e) => Some(e),
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<onepass_core::Error> for CliError {
    fn from(e: onepass_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_input_from_analysis() {
        assert_eq!(CliError::usage("x").exit_code(), 2);
        assert_eq!(CliError::format("f.csv", "bad").exit_code(), 2);
        assert_eq!(CliError::Core(onepass_core::Error::InvalidCurve("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(onepass_core::Error::NoPowerRegion("x".into())).exit_code(), 3);
        assert_eq!(
            CliError::Core(onepass_core::Error::UnreachableLoss { target: 1.0, gap: 0.1 }).exit_code(),
            3
        );
    }
}
