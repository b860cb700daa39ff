//! Versioned TOML run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cam::{CamDesign, MechanismLayout};
use crate::error::ConfigError;
use crate::gait::GaitParams;
use crate::opt::{DesignSpace, OptimizerSettings, SweepSettings};
use crate::sim::{build_model, ContactParams, ModelConfig, RewardWeights, RolloutSetup, SimSettings};
use crate::task::{PushSpec, TaskKind, TaskSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Task preset plus field overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward_speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command_range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roughness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friction_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pushes: Option<PushSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_perturbation: Option<f64>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self::preset(TaskKind::Forward1ms)
    }
}

impl TaskConfig {
    pub fn preset(kind: TaskKind) -> Self {
        Self {
            kind,
            duration: None,
            forward_speed: None,
            command_range: None,
            segments: None,
            segment_duration: None,
            roughness: None,
            friction_range: None,
            pushes: None,
            payload_kg: None,
            design_perturbation: None,
        }
    }

    pub fn spec(&self) -> TaskSpec {
        let mut t = TaskSpec::preset(self.kind);
        if let Some(v) = self.segments {
            t.segments = v;
        }
        if let Some(v) = self.segment_duration {
            t.segment_duration = v;
        }
        if self.kind == TaskKind::RandomCommands {
            t.duration = t.segments as f64 * t.segment_duration;
        }
        if let Some(v) = self.duration {
            t.duration = v;
        }
        if let Some(v) = self.forward_speed {
            t.forward_speed = v;
        }
        if let Some(v) = self.command_range {
            t.command_range = v;
        }
        if let Some(v) = self.roughness {
            t.roughness = v;
        }
        if let Some(v) = self.friction_range {
            t.friction_range = v;
        }
        if let Some(v) = self.pushes {
            t.pushes = v;
        }
        if let Some(v) = self.payload_kg {
            t.payload_kg = v;
        }
        if let Some(v) = self.design_perturbation {
            t.design_perturbation = v;
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSettings {
    pub q_min: f64,
    pub q_max: f64,
    pub samples: usize,
}

impl Default for CurveSettings {
    fn default() -> Self {
        Self {
            q_min: -0.5,
            q_max: 2.7,
            samples: 321,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSettings {
    pub design_a: CamDesign,
    pub design_b: CamDesign,
    pub episodes: usize,
}

impl Default for CompareSettings {
    fn default() -> Self {
        Self {
            design_a: CamDesign::rigid(),
            design_b: CamDesign::circular(0.0, 0.06, crate::cam::DEFAULT_SPRING_STIFFNESS),
            episodes: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses every processor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub gait: GaitParams,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default)]
    pub reward: RewardWeights,
    #[serde(default = "SimSettings::desk")]
    pub sim: SimSettings,
    #[serde(default)]
    pub layout: MechanismLayout,
    /// Design used by `torque-curve` and `simulate`.
    #[serde(default = "CamDesign::hardware")]
    pub design: CamDesign,
    #[serde(default)]
    pub design_space: DesignSpace,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub compare: CompareSettings,
    #[serde(default)]
    pub torque_curve: CurveSettings,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            out_dir: default_out_dir(),
            workers: None,
            model: ModelConfig::default(),
            gait: GaitParams::default(),
            contact: ContactParams::default(),
            reward: RewardWeights::default(),
            sim: SimSettings::desk(),
            layout: MechanismLayout::default(),
            design: CamDesign::hardware(),
            design_space: DesignSpace::default(),
            task: TaskConfig::default(),
            optimizer: OptimizerSettings::default(),
            sweep: SweepSettings::default(),
            compare: CompareSettings::default(),
            torque_curve: CurveSettings::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::invalid("workers", "must be at least 1"));
        }
        self.model.validate()?;
        self.gait.validate()?;
        self.contact.validate()?;
        self.reward.validate()?;
        self.sim.validate()?;
        self.design_space.validate()?;
        self.task.spec().validate()?;
        for (path, d) in [
            ("design", &self.design),
            ("compare.design_a", &self.compare.design_a),
            ("compare.design_b", &self.compare.design_b),
        ] {
            d.validate().map_err(|e| ConfigError::invalid(path, e.to_string()))?;
        }
        if !(self.torque_curve.q_min < self.torque_curve.q_max) || self.torque_curve.samples < 2 {
            return Err(ConfigError::invalid("torque_curve", "need q_min < q_max and at least 2 samples"));
        }
        if self.compare.episodes == 0 {
            return Err(ConfigError::invalid("compare.episodes", "must be at least 1"));
        }
        self.optimizer.validate().map_err(|e| ConfigError::invalid("optimizer", e.to_string()))?;
        if self.sweep.resolution.contains(&0) || self.sweep.episodes == 0 {
            return Err(ConfigError::invalid("sweep", "resolution and episodes must be positive"));
        }
        Ok(())
    }

    pub fn task_spec(&self) -> TaskSpec {
        self.task.spec()
    }

    pub fn setup(&self) -> Result<RolloutSetup, ConfigError> {
        Ok(RolloutSetup {
            model: build_model(&self.model)?,
            gait: self.gait.clone(),
            contact: self.contact,
            layout: self.layout,
            weights: self.reward,
            settings: self.sim,
        })
    }

    /// Canonical JSON form of the effective configuration.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical form, ignoring
    /// fields that do not change results (`workers`, `out_dir`).
    pub fn hash(&self) -> String {
        let neutral = Self {
            workers: None,
            out_dir: default_out_dir(),
            ..self.clone()
        };
        let digest = Sha256::digest(neutral.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
