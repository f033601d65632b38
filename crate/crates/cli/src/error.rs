use std::fmt;

/// Exit code for a bad flag, config file or input file.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code for a failure while simulating or writing results.
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Runtime,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    message: String,
}

impl CliError {
    pub fn config(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.to_string(),
        }
    }

    pub fn runtime(message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Runtime,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Runtime => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
