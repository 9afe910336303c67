use std::fmt;

/// Failures of a run, grouped by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags.
    Usage(String),
    /// Unreadable or invalid configuration.
    Config(String),
    /// A numerical guard or model precondition failed.
    Numerical(su11sim::Error),
    /// Output could not be written.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<su11sim::Error> for CliError {
    fn from(e: su11sim::Error) -> Self {
        match e {
            su11sim::Error::Io(io) => CliError::Io(io),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
