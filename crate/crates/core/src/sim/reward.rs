//! Per-step locomotion reward.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub tracking: f64,
    pub base_motion: f64,
    pub action_smoothness: f64,
    pub torque: f64,
    pub velocity_limit: f64,
    pub slip: f64,
    /// Sharpness of the tracking kernel `exp(-c·err²)`.
    pub tracking_sharpness: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            tracking: 1.0,
            base_motion: 0.2,
            action_smoothness: 1e-4,
            torque: 2e-4,
            velocity_limit: 0.5,
            slip: 0.1,
            tracking_sharpness: 4.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let all = [
            ("tracking", self.tracking),
            ("base_motion", self.base_motion),
            ("action_smoothness", self.action_smoothness),
            ("torque", self.torque),
            ("velocity_limit", self.velocity_limit),
            ("slip", self.slip),
            ("tracking_sharpness", self.tracking_sharpness),
        ];
        for (name, v) in all {
            if !(v >= 0.0) {
                return Err(ConfigError::invalid(format!("reward.{name}"), "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Quantities the reward is computed from over one control interval.
#[derive(Debug, Clone, Copy)]
pub struct RewardInputs<'a> {
    pub command: f64,
    pub forward_velocity: f64,
    pub vertical_velocity: f64,
    pub pitch_rate: f64,
    /// Joint targets at t, t-1 and t-2.
    pub actions: [&'a [f64]; 3],
    /// Motor torques (root-mean-square over the interval), N·m.
    pub torques: &'a [f64],
    pub joint_velocities: &'a [f64],
    pub velocity_limit: f64,
    /// Foot slip accumulated over the interval, m.
    pub slip: f64,
}

/// Signed reward terms; `total` is their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub tracking: f64,
    pub base_motion: f64,
    pub action_smoothness: f64,
    pub torque: f64,
    pub velocity_limit: f64,
    pub slip: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn terms(&self) -> [f64; 6] {
        [
            self.tracking,
            self.base_motion,
            self.action_smoothness,
            self.torque,
            self.velocity_limit,
            self.slip,
        ]
    }
}

pub fn reward(inputs: &RewardInputs, weights: &RewardWeights) -> RewardBreakdown {
    let err = inputs.forward_velocity - inputs.command;
    let [a0, a1, a2] = inputs.actions;
    let accel: f64 = a0
        .iter()
        .zip(a1)
        .zip(a2)
        .map(|((x0, x1), x2)| (x0 - 2.0 * x1 + x2).powi(2))
        .sum();
    let torque_sq: f64 = inputs.torques.iter().map(|t| t * t).sum();
    let excess: f64 = inputs
        .joint_velocities
        .iter()
        .map(|v| (v.abs() - inputs.velocity_limit).max(0.0))
        .sum();
    let mut r = RewardBreakdown {
        tracking: weights.tracking * (-weights.tracking_sharpness * err * err).exp(),
        base_motion: -weights.base_motion * (inputs.vertical_velocity.powi(2) + inputs.pitch_rate.powi(2)),
        action_smoothness: -weights.action_smoothness * accel,
        torque: -weights.torque * torque_sq,
        velocity_limit: -weights.velocity_limit * excess,
        slip: -weights.slip * inputs.slip,
        total: 0.0,
    };
    r.total = r.terms().iter().sum();
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still<'a>(zeros: &'a [f64], torques: &'a [f64]) -> RewardInputs<'a> {
        RewardInputs {
            command: 0.7,
            forward_velocity: 0.7,
            vertical_velocity: 0.0,
            pitch_rate: 0.0,
            actions: [zeros, zeros, zeros],
            torques,
            joint_velocities: zeros,
            velocity_limit: 12.0,
            slip: 0.0,
        }
    }

    #[test]
    fn perfect_tracking_at_rest() {
        let z = [0.0; 4];
        let w = RewardWeights::default();
        let r = reward(&still(&z, &z), &w);
        assert_eq!(r.total, w.tracking);
    }

    #[test]
    fn torque_penalty_is_quadratic() {
        let z = [0.0; 4];
        let w = RewardWeights::default();
        let t1 = [3.0, -1.0, 2.0, 0.5];
        let t2 = t1.map(|t| 2.0 * t);
        let r1 = reward(&still(&z, &t1), &w);
        let r2 = reward(&still(&z, &t2), &w);
        assert!((r2.torque - 4.0 * r1.torque).abs() < 1e-15);
    }
}
