use thiserror::Error;

use crate::cam::CamDesign;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CamError {
    #[error("anchor lies inside the cam at knee angle {q} rad")]
    NoTangent { q: f64 },
    #[error("invalid cam design {0:?}")]
    InvalidDesign(CamDesign),
    #[error("invalid curve range [{q_min}, {q_max}] with {n} samples")]
    InvalidRange { q_min: f64, q_max: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state magnitude exceeded 1e6 at t = {time} s")]
    NumericalBlowup { time: f64 },
    #[error("mass matrix is not positive definite")]
    SingularMass,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Cam(#[from] CamError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("failed to parse config: {0}")]
    Parse(String),
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OptError {
    #[error("at least two distinct records are required to fit a surrogate")]
    TooFewRecords,
    #[error("kernel matrix is not positive definite")]
    IllConditioned,
    #[error("budget {budget} is smaller than the {initial} initial designs")]
    BudgetTooSmall { budget: usize, initial: usize },
    #[error("gravity torque {required} N·m exceeds spring capability at q_bar = {q_bar}")]
    NoBalance { q_bar: f64, required: f64 },
    #[error("CoTr undefined: traveled distance {distance} m is below {min} m")]
    InsufficientDistance { distance: f64, min: f64 },
    #[error("journal error: {0}")]
    Journal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Cam(#[from] CamError),
}
