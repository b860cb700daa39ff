//! Evaluation scenarios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[serde(rename = "forward_1ms")]
    Forward1ms,
    RandomCommands,
    Stand,
    Payload,
    Rough,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Forward1ms,
        TaskKind::RandomCommands,
        TaskKind::Stand,
        TaskKind::Payload,
        TaskKind::Rough,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Forward1ms => "forward_1ms",
            TaskKind::RandomCommands => "random_commands",
            TaskKind::Stand => "stand",
            TaskKind::Payload => "payload",
            TaskKind::Rough => "rough",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError::UnknownTask(s.to_string()))
    }
}

/// Random base pushes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushSpec {
    /// Peak horizontal/vertical force, N.
    pub max_force: f64,
    /// Peak pitch torque, N·m.
    pub max_torque: f64,
    /// Mean time between pushes, s; non-positive disables pushes.
    pub mean_interval: f64,
    /// Duration of each push, s.
    pub duration: f64,
}

impl Default for PushSpec {
    fn default() -> Self {
        Self {
            max_force: 50.0,
            max_torque: 50.0,
            mean_interval: 2.0,
            duration: 0.1,
        }
    }
}

impl PushSpec {
    pub fn none() -> Self {
        Self {
            mean_interval: 0.0,
            ..Self::default()
        }
    }

    pub fn enabled(&self) -> bool {
        self.mean_interval > 0.0 && (self.max_force > 0.0 || self.max_torque > 0.0)
    }
}

/// A scenario used to score designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Episode length, s.
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Constant command of the forward-walking tasks, m/s.
    #[serde(default = "default_speed")]
    pub forward_speed: f64,
    /// Half-width of the random command range, m/s.
    #[serde(default = "default_range")]
    pub command_range: f64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_segment_duration")]
    pub segment_duration: f64,
    /// Peak terrain height variation, m; zero is flat.
    #[serde(default)]
    pub roughness: f64,
    #[serde(default = "default_friction")]
    pub friction_range: [f64; 2],
    #[serde(default)]
    pub pushes: PushSpec,
    #[serde(default)]
    pub payload_kg: f64,
    /// Relative per-leg perturbation of the cam parameters.
    #[serde(default)]
    pub design_perturbation: f64,
}

fn default_duration() -> f64 {
    4.0
}
fn default_speed() -> f64 {
    1.0
}
fn default_range() -> f64 {
    1.2
}
fn default_segments() -> usize {
    10
}
fn default_segment_duration() -> f64 {
    3.0
}
fn default_friction() -> [f64; 2] {
    [0.5, 2.0]
}

impl TaskSpec {
    pub fn preset(kind: TaskKind) -> Self {
        let base = Self {
            kind,
            duration: default_duration(),
            forward_speed: default_speed(),
            command_range: default_range(),
            segments: default_segments(),
            segment_duration: default_segment_duration(),
            roughness: 0.0,
            friction_range: default_friction(),
            pushes: PushSpec::default(),
            payload_kg: 0.0,
            design_perturbation: 0.0,
        };
        match kind {
            TaskKind::Forward1ms => base,
            TaskKind::Stand => Self {
                pushes: PushSpec::none(),
                ..base
            },
            TaskKind::RandomCommands => Self {
                duration: base.segments as f64 * base.segment_duration,
                ..base
            },
            TaskKind::Payload => Self {
                payload_kg: 20.0,
                ..base
            },
            TaskKind::Rough => Self {
                roughness: 0.02,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.duration > 0.0) {
            return Err(ConfigError::invalid("task.duration", "must be positive"));
        }
        if !(self.command_range >= 0.0) {
            return Err(ConfigError::invalid("task.command_range", "must be non-negative"));
        }
        if self.kind == TaskKind::RandomCommands && (self.segments == 0 || !(self.segment_duration > 0.0)) {
            return Err(ConfigError::invalid("task.segments", "need at least one positive-length segment"));
        }
        let [lo, hi] = self.friction_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(ConfigError::invalid("task.friction_range", "need 0 < low <= high"));
        }
        if !(self.roughness >= 0.0) {
            return Err(ConfigError::invalid("task.roughness", "must be non-negative"));
        }
        if !(self.payload_kg >= 0.0) {
            return Err(ConfigError::invalid("task.payload_kg", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.design_perturbation) {
            return Err(ConfigError::invalid("task.design_perturbation", "must lie in [0, 1)"));
        }
        Ok(())
    }
}
