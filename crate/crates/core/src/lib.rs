//! Parallel-elastic knee design toolkit.
//!
//! * [`cam`]: elliptic-cam wire/spring geometry and knee torque.
//! * [`sim`]: planar quadruped dynamics with penalty contact.
//! * [`config`]: versioned TOML run configuration.
//! * [`gait`]: phase-driven foot trajectories, leg IK and PD tracking.
//! * [`opt`]: Monte-Carlo design objective, Gaussian-process surrogate and
//!   expected-improvement search, sweeps and comparisons.

pub mod cam;
pub mod config;
pub mod error;
pub mod gait;
pub mod opt;
pub mod quadrature;
pub mod sim;
pub mod task;

pub use cam::{CamDesign, CamGeometry, CamSpring, MechanismLayout};
pub use config::RunConfig;
pub use error::{CamError, ConfigError, OptError, SimError};
pub use gait::GaitParams;
pub use opt::{DesignEvalRecord, DesignSpace, OptimizerSettings, SweepSettings};
pub use sim::{ContactParams, ModelConfig, PlanarModel, RolloutResult, RolloutSetup, SimSettings};
pub use task::{TaskKind, TaskSpec};
