//! Planar kinematic-tree models.

use serde::{Deserialize, Serialize};

use crate::cam::Vec2;
use crate::error::ConfigError;

pub const GRAVITY: f64 = 9.81;

/// Degree of freedom connecting a body to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    /// Translation along the parent x axis.
    PrismaticX,
    /// Translation along the parent z axis.
    PrismaticZ,
    /// Rotation about the joint origin, counter-clockwise positive.
    Revolute,
}

/// A rigid body with one joint to its parent. Body `i` owns coordinate `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub name: String,
    pub parent: Option<usize>,
    pub joint: JointKind,
    /// Joint origin in the parent frame (world frame for roots).
    pub offset: Vec2,
    pub mass: f64,
    /// Centre of mass in the body frame.
    pub com: Vec2,
    /// Rotational inertia about the centre of mass.
    pub inertia: f64,
}

/// Two-segment leg attached to the base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub hip: usize,
    pub knee: usize,
    /// Hip position in the base frame.
    pub hip_pos: Vec2,
    pub thigh_len: f64,
    pub shank_len: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
}

/// Planar articulated model.
///
/// The quadruped built by [`build_model`] has coordinates
/// `(x, z, pitch, q_hip_front, q_knee_front, q_hip_hind, q_knee_hind)`.
/// Each planar leg lumps a left/right pair of physical legs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarModel {
    pub bodies: Vec<Body>,
    /// Index of the floating base body, if any.
    pub base: Option<usize>,
    pub legs: Vec<Leg>,
    /// Actuated coordinates in action order.
    pub actuated: Vec<usize>,
    pub limits: Vec<JointLimits>,
    pub torque_limit: f64,
    pub velocity_limit: f64,
    pub total_mass: f64,
    pub gravity: f64,
    /// Physical springs acting on each planar knee.
    pub springs_per_knee: f64,
}

impl PlanarModel {
    pub fn dof(&self) -> usize {
        self.bodies.len()
    }

    pub fn knee_indices(&self) -> Vec<usize> {
        self.legs.iter().map(|l| l.knee).collect()
    }

    /// Adds a point payload at the base centre.
    pub fn with_payload(mut self, kg: f64) -> Self {
        if kg > 0.0 {
            if let Some(b) = self.base {
                self.bodies[b].mass += kg;
                self.total_mass += kg;
            }
        }
        self
    }

    pub fn with_gravity(mut self, g: f64) -> Self {
        self.gravity = g;
        self
    }

    /// Uniformly scales every body mass and inertia.
    pub fn scale_mass(mut self, factor: f64) -> Self {
        for b in &mut self.bodies {
            b.mass *= factor;
            b.inertia *= factor;
        }
        self.total_mass *= factor;
        self
    }

    /// Single rod pendulum on a fixed pivot; coordinate 0 is the joint angle.
    pub fn pendulum(mass: f64, com: f64, inertia: f64) -> Self {
        Self {
            bodies: vec![Body {
                name: "link".into(),
                parent: None,
                joint: JointKind::Revolute,
                offset: Vec2::zeros(),
                mass,
                com: Vec2::new(0.0, -com),
                inertia,
            }],
            base: None,
            legs: vec![],
            actuated: vec![0],
            limits: vec![JointLimits { lower: -10.0, upper: 10.0 }],
            torque_limit: f64::INFINITY,
            velocity_limit: f64::INFINITY,
            total_mass: mass,
            gravity: GRAVITY,
            springs_per_knee: 1.0,
        }
    }

    /// Two-link leg hanging from a fixed hip; coordinates are (hip, knee).
    pub fn fixed_leg(config: &ModelConfig) -> Self {
        let mut bodies = Vec::new();
        let (thigh, shank) = config.link_bodies(Some(0), Vec2::zeros());
        bodies.push(Body { parent: None, ..thigh });
        bodies.push(shank);
        Self {
            bodies,
            base: None,
            legs: vec![Leg {
                hip: 0,
                knee: 1,
                hip_pos: Vec2::zeros(),
                thigh_len: config.thigh_length,
                shank_len: config.shank_length,
            }],
            actuated: vec![0, 1],
            limits: vec![config.hip_limits, config.knee_limits],
            torque_limit: config.torque_limit,
            velocity_limit: config.velocity_limit,
            total_mass: config.thigh_mass_total() + config.shank_mass,
            gravity: config.gravity,
            springs_per_knee: config.springs_per_knee,
        }
    }
}

/// Model parameters as read from the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub base_mass: f64,
    pub base_inertia: f64,
    pub thigh_length: f64,
    pub shank_length: f64,
    /// Lumped thigh mass per planar leg (two physical thighs), kg.
    pub thigh_mass: f64,
    /// Lumped shank mass per planar leg, kg.
    pub shank_mass: f64,
    /// Centre of mass along each link as a fraction of its length.
    pub thigh_com: f64,
    pub shank_com: f64,
    pub hip_x_front: f64,
    pub hip_x_hind: f64,
    pub hip_z: f64,
    pub hip_limits: JointLimits,
    pub knee_limits: JointLimits,
    /// Torque limit per planar joint, N·m.
    pub torque_limit: f64,
    pub velocity_limit: f64,
    pub gravity: f64,
    /// Whether the knee spring hardware is mounted.
    pub spring_equipped: bool,
    /// Added thigh mass per planar leg when spring-equipped, kg.
    pub spring_mass: f64,
    pub springs_per_knee: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            base_mass: 41.3,
            base_inertia: 2.34,
            thigh_length: 0.3,
            shank_length: 0.3,
            thigh_mass: 4.0,
            shank_mass: 1.0,
            thigh_com: 0.3,
            shank_com: 0.4,
            hip_x_front: 0.35,
            hip_x_hind: -0.35,
            hip_z: 0.0,
            hip_limits: JointLimits { lower: -1.8, upper: 1.8 },
            knee_limits: JointLimits { lower: -0.5, upper: 2.7 },
            torque_limit: 160.0,
            velocity_limit: 12.0,
            gravity: GRAVITY,
            spring_equipped: true,
            spring_mass: 0.6,
            springs_per_knee: 2.0,
        }
    }
}

impl ModelConfig {
    pub fn rigid() -> Self {
        Self {
            spring_equipped: false,
            ..Self::default()
        }
    }

    fn thigh_mass_total(&self) -> f64 {
        self.thigh_mass + if self.spring_equipped { self.spring_mass } else { 0.0 }
    }

    fn link_bodies(&self, thigh_index: Option<usize>, hip: Vec2) -> (Body, Body) {
        let tm = self.thigh_mass_total();
        let thigh = Body {
            name: "thigh".into(),
            parent: None,
            joint: JointKind::Revolute,
            offset: hip,
            mass: tm,
            com: Vec2::new(0.0, -self.thigh_com * self.thigh_length),
            inertia: tm * self.thigh_length.powi(2) / 12.0,
        };
        let shank = Body {
            name: "shank".into(),
            parent: thigh_index,
            joint: JointKind::Revolute,
            offset: Vec2::new(0.0, -self.thigh_length),
            mass: self.shank_mass,
            com: Vec2::new(0.0, -self.shank_com * self.shank_length),
            inertia: self.shank_mass * self.shank_length.powi(2) / 12.0,
        };
        (thigh, shank)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("base_mass", self.base_mass),
            ("base_inertia", self.base_inertia),
            ("thigh_length", self.thigh_length),
            ("shank_length", self.shank_length),
            ("thigh_mass", self.thigh_mass),
            ("shank_mass", self.shank_mass),
            ("torque_limit", self.torque_limit),
            ("velocity_limit", self.velocity_limit),
            ("springs_per_knee", self.springs_per_knee),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(ConfigError::invalid(format!("model.{name}"), "must be positive"));
            }
        }
        for (name, v) in [("thigh_com", self.thigh_com), ("shank_com", self.shank_com)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::invalid(format!("model.{name}"), "must lie in [0, 1]"));
            }
        }
        if !(self.gravity >= 0.0) {
            return Err(ConfigError::invalid("model.gravity", "must be non-negative"));
        }
        if self.spring_mass < 0.0 {
            return Err(ConfigError::invalid("model.spring_mass", "must be non-negative"));
        }
        for (name, l) in [("hip_limits", self.hip_limits), ("knee_limits", self.knee_limits)] {
            if !(l.lower < l.upper) {
                return Err(ConfigError::invalid(format!("model.{name}"), "lower must be below upper"));
            }
        }
        if !(self.hip_x_front > self.hip_x_hind) {
            return Err(ConfigError::invalid("model.hip_x_front", "must be ahead of hip_x_hind"));
        }
        Ok(())
    }
}

/// Builds the floating-base planar quadruped.
pub fn build_model(config: &ModelConfig) -> Result<PlanarModel, ConfigError> {
    config.validate()?;
    let massless = |name: &str, parent, joint| Body {
        name: name.into(),
        parent,
        joint,
        offset: Vec2::zeros(),
        mass: 0.0,
        com: Vec2::zeros(),
        inertia: 0.0,
    };
    let mut bodies = vec![
        massless("base_x", None, JointKind::PrismaticX),
        massless("base_z", Some(0), JointKind::PrismaticZ),
        Body {
            name: "base".into(),
            parent: Some(1),
            joint: JointKind::Revolute,
            offset: Vec2::zeros(),
            mass: config.base_mass,
            com: Vec2::zeros(),
            inertia: config.base_inertia,
        },
    ];
    let mut legs = Vec::new();
    for (label, hip_x) in [("front", config.hip_x_front), ("hind", config.hip_x_hind)] {
        let hip_pos = Vec2::new(hip_x, config.hip_z);
        let hip = bodies.len();
        let (mut thigh, mut shank) = config.link_bodies(Some(hip), hip_pos);
        thigh.parent = Some(2);
        thigh.name = format!("{label}_thigh");
        shank.name = format!("{label}_shank");
        bodies.push(thigh);
        bodies.push(shank);
        legs.push(Leg {
            hip,
            knee: hip + 1,
            hip_pos,
            thigh_len: config.thigh_length,
            shank_len: config.shank_length,
        });
    }
    let total_mass = bodies.iter().map(|b| b.mass).sum();
    Ok(PlanarModel {
        bodies,
        base: Some(2),
        legs,
        actuated: vec![3, 4, 5, 6],
        limits: vec![config.hip_limits, config.knee_limits, config.hip_limits, config.knee_limits],
        torque_limit: config.torque_limit,
        velocity_limit: config.velocity_limit,
        total_mass,
        gravity: config.gravity,
        springs_per_knee: config.springs_per_knee,
    })
}
