use dissipgap_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    /// Malformed or inconsistent input; exit status 2.
    #[error("{0}")]
    Config(String),

    /// Input rejected by a module precondition; exit status 2.
    #[error("invalid input: {0}")]
    Invalid(CoreError),

    /// A module failed while running; exit status 1.
    #[error(transparent)]
    Module(CoreError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScenarioError {
    pub fn config(msg: impl Into<String>) -> Self {
        ScenarioError::Config(msg.into())
    }

    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Module(_) => 1,
            _ => 2,
        }
    }
}

/// Input-shaped module errors count as validation failures.
impl From<CoreError> for ScenarioError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotSquare { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::NonFinite
            | CoreError::NotPsd { .. }
            | CoreError::NotHermitian { .. }
            | CoreError::NotDissipative { .. }
            | CoreError::NotAccretive { .. }
            | CoreError::NotContraction { .. }
            | CoreError::NotInPhaseSpace { .. }
            | CoreError::InvalidArgument(_)
            | CoreError::Coefficients(_) => ScenarioError::Invalid(e),
            other => ScenarioError::Module(other),
        }
    }
}
