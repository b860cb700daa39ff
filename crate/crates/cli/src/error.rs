use pecam_core::{CamError, ConfigError, OptError, SimError};

/// Failure of one invocation, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Geometry(_) => 3,
            Self::Numeric(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<CamError> for CliError {
    fn from(e: CamError) -> Self {
        match e {
            CamError::InvalidRange { .. } => Self::Config(e.to_string()),
            _ => Self::Geometry(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Cam(c) => c.into(),
            SimError::InvalidModel(_) => Self::Config(e.to_string()),
            SimError::NumericalBlowup { .. } | SimError::SingularMass => Self::Numeric(e.to_string()),
        }
    }
}

impl From<OptError> for CliError {
    fn from(e: OptError) -> Self {
        match e {
            OptError::Config(c) => c.into(),
            OptError::Sim(s) => s.into(),
            OptError::Cam(c) => c.into(),
            OptError::NoBalance { .. } => Self::Geometry(e.to_string()),
            OptError::BudgetTooSmall { .. } | OptError::Journal(_) => Self::Config(e.to_string()),
            OptError::Io(_) => Self::Io(e.to_string()),
            OptError::TooFewRecords | OptError::IllConditioned | OptError::InsufficientDistance { .. } => {
                Self::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
