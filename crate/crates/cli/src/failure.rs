use std::fmt;

/// Error categories on the stderr line `error[<kind>]: <message>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Config,
    Io,
    Numerics,
    /// A validity check on computed results failed.
    Check,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Config => "config",
            Kind::Io => "io",
            Kind::Numerics => "numerics",
            Kind::Check => "check",
        }
    }

    /// 2 for anything the caller can fix by changing flags or config.
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Usage | Kind::Config => 2,
            Kind::Io | Kind::Numerics | Kind::Check => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> CliError {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> CliError {
        CliError::new(Kind::Config, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Keep the line machine-parsable: no embedded newlines.
        write!(f, "error[{}]: {}", self.kind.as_str(), self.message.replace('\n', " "))
    }
}

impl From<resonatorsim::Error> for CliError {
    fn from(e: resonatorsim::Error) -> CliError {
        use resonatorsim::Error as E;
        let kind = match &e {
            E::Config(_) | E::InvalidParameter(_) | E::ZeroDetuning { .. } | E::Json(_) => Kind::Config,
            E::Io(_) => Kind::Io,
            _ => Kind::Numerics,
        };
        match e {
            E::Config(message) => CliError::new(kind, message),
            other => CliError::new(kind, other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::new(Kind::Io, e.to_string())
    }
}
