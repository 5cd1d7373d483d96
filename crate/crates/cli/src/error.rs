use std::fmt;

/// Everything that ends a run early, with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Missing or contradictory flags; exit 2 like any usage error.
    Usage(String),
    Core(alphamu::Error),
    /// The oracles disagree beyond the declared tolerances.
    Validation(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(alphamu::Error::Domain(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<alphamu::Error> for CliError {
    fn from(e: alphamu::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
