use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Validation,
    UnknownScenario,
    Physics,
    Io,
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{kind:?}: {message}")]
pub struct CliError {
    pub kind: ErrorKind,
    /// Physics module that raised the error, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub module: Option<String>,
    pub message: String,
}

impl CliError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, module: None, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Validation, message)
    }

    pub fn unknown_scenario(name: &str) -> Self {
        Self::new(ErrorKind::UnknownScenario, format!("unknown scenario `{name}`"))
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Io, message)
    }

    pub fn physics(module: &str, err: cqed_core::Error) -> Self {
        Self { kind: ErrorKind::Physics, module: Some(module.into()), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config | ErrorKind::Validation | ErrorKind::UnknownScenario => 2,
            ErrorKind::Physics => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

/// Tags core errors with the module they came from.
pub trait Context<T> {
    fn within(self, module: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for cqed_core::Result<T> {
    fn within(self, module: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::physics(module, e))
    }
}
