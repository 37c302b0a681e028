use std::fmt;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const CONFIG_UNREADABLE: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const NUMERICAL: u8 = 4;
    pub const TARGET_UNREACHABLE: u8 = 5;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<fso_linklab::Error> for CliError {
    fn from(e: fso_linklab::Error) -> Self {
        use fso_linklab::Error as E;
        let code = match &e {
            E::Config(_) => exit::CONFIG_UNREADABLE,
            E::ScenarioValidation { .. } | E::InvalidArgument(_) => exit::VALIDATION,
            E::TargetUnreachable { .. } => exit::TARGET_UNREACHABLE,
            E::InvalidMatrix(_)
            | E::NanInput(_)
            | E::IntegrationFailure { .. }
            | E::ComplexityLimit { .. } => exit::NUMERICAL,
        };
        Self::new(code, e.to_string())
    }
}
