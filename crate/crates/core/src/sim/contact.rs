//! Penalty ground contact with regularized Coulomb friction.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cam::Vec2;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContactParams {
    /// Normal stiffness, N/m.
    pub stiffness: f64,
    /// Normal damping, N·s/m.
    pub damping: f64,
    pub friction: f64,
    /// Tangential speed below which friction is linear in slip speed, m/s.
    pub reg_velocity: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            stiffness: 1e5,
            damping: 1e3,
            friction: 1.0,
            reg_velocity: 0.01,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("stiffness", self.stiffness),
            ("damping", self.damping),
            ("reg_velocity", self.reg_velocity),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::invalid(format!("contact.{name}"), "must be positive"));
            }
        }
        if !(self.friction >= 0.0) {
            return Err(ConfigError::invalid("contact.friction", "must be non-negative"));
        }
        Ok(())
    }
}

/// Ground profile `z = h(x)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Terrain {
    #[default]
    Flat,
    /// Sum of sinusoids `(amplitude, wavenumber, phase)`.
    HeightField(Vec<(f64, f64, f64)>),
}

impl Terrain {
    /// Random smooth height field with peak amplitude about `amplitude`.
    pub fn rough<R: Rng>(amplitude: f64, rng: &mut R) -> Self {
        if amplitude <= 0.0 {
            return Terrain::Flat;
        }
        let modes = [(0.5, 2.0), (0.3, 5.0), (0.2, 11.0)];
        Terrain::HeightField(
            modes
                .iter()
                .map(|&(w, k)| (w * amplitude, k * rng.gen_range(0.8..1.2), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect(),
        )
    }

    pub fn height(&self, x: f64) -> f64 {
        match self {
            Terrain::Flat => 0.0,
            Terrain::HeightField(modes) => modes.iter().map(|&(a, k, p)| a * (k * x + p).sin()).sum(),
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Terrain::Flat => 0.0,
            Terrain::HeightField(modes) => modes.iter().map(|&(a, k, p)| a * k * (k * x + p).cos()).sum(),
        }
    }
}

/// Contact force on a foot, world frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FootForce {
    pub normal: f64,
    pub tangential: f64,
    pub in_contact: bool,
}

impl FootForce {
    pub fn vector(&self) -> Vec2 {
        Vec2::new(self.tangential, self.normal)
    }
}

/// Penetration-driven normal force, clamped to be non-negative.
pub fn normal_force(params: &ContactParams, terrain: &Terrain, pos: Vec2, vel: Vec2) -> (f64, bool) {
    let depth = terrain.height(pos.x) - pos.y;
    if depth <= 0.0 {
        return (0.0, false);
    }
    let depth_rate = terrain.slope(pos.x) * vel.x - vel.y;
    ((params.stiffness * depth + params.damping * depth_rate).max(0.0), true)
}

/// Explicit contact force at a foot with the given position and velocity.
///
/// Friction is `-μ N sat(v_t / v_reg)`. The simulator step evaluates the same
/// law implicitly in the slip speed; see [`super::step`].
pub fn contact_force(params: &ContactParams, terrain: &Terrain, pos: Vec2, vel: Vec2) -> FootForce {
    let (normal, in_contact) = normal_force(params, terrain, pos, vel);
    if !in_contact {
        return FootForce::default();
    }
    let sat = (vel.x / params.reg_velocity).clamp(-1.0, 1.0);
    FootForce {
        normal,
        tangential: -params.friction * normal * sat,
        in_contact,
    }
}
