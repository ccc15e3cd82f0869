use std::path::PathBuf;

use thiserror::Error;

use crate::config::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing key `scenario`")]
    MissingScenario,
    #[error("key `{key}` is required by scenario {scenario}")]
    Missing { key: &'static str, scenario: Scenario },
    #[error("key `{key}` is required to define the grid")]
    MissingGrid { key: &'static str },
    #[error("key `{key}` is not used by scenario {scenario}")]
    NotApplicable { key: String, scenario: Scenario },
    #[error("`{key}` = {value}: {reason}")]
    Invalid { key: &'static str, value: String, reason: String },
    #[error("{message}")]
    Conflict { message: String },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] nvconf::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for a broken numerical contract, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
