use fbpanel_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Internal(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o error: {e}"))
    }
}

impl CliError {
    /// 2 for bad input, 3 when the computation reports an empty or
    /// uninformative result, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Domain { .. }
                | CoreError::DimensionMismatch(_)
                | CoreError::CapExceeded { .. }
                | CoreError::InvalidArgument(_)
                | CoreError::Parse { .. } => 2,
                CoreError::EmptySet
                | CoreError::NoObservations { .. }
                | CoreError::NoSignChange { .. }
                | CoreError::EmptyCell { .. }
                | CoreError::NoSwitchers
                | CoreError::DegenerateWeight { .. }
                | CoreError::IterationLimit { .. } => 3,
                CoreError::MalformedLp(_) | CoreError::Io(_) => 4,
            },
            CliError::Internal(_) => 4,
        }
    }
}
