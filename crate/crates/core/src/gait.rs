//! Phase-driven gait: foot trajectories, leg IK and PD joint tracking.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cam::Vec2;
use crate::error::ConfigError;
use crate::sim::model::Leg;
use crate::sim::PlanarModel;
use crate::task::{TaskKind, TaskSpec};

/// Margin kept from the edges of the reachable annulus, m.
pub const IK_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitParams {
    /// Stride frequency, Hz.
    pub frequency: f64,
    /// Swing apex height above the stance line, m.
    pub clearance: f64,
    /// Fraction of the period spent in stance.
    pub duty: f64,
    /// Nominal foot position relative to each hip, gravity-aligned frame, m.
    pub nominal_foot: [f64; 2],
    pub kp: f64,
    pub kd: f64,
    /// Phase offset of the front and hind leg pairs, rad.
    pub phase_offsets: [f64; 2],
    /// Integral gain on forward-velocity error, 1/s.
    pub velocity_gain: f64,
    /// Bound on the integral velocity correction, m/s.
    pub velocity_correction_limit: f64,
    /// Rate limit applied to the incoming command, m/s².
    pub max_acceleration: f64,
    /// Touchdown shift per unit forward-velocity error, s.
    pub placement_gain: f64,
    /// Bound on the touchdown shift, m.
    pub placement_limit: f64,
    /// Scale on the position gains of stance hips.
    pub stance_hip_scale: f64,
    /// Body pitch stiffness and damping shared by the stance hips.
    pub attitude_kp: f64,
    pub attitude_kd: f64,
    /// Hip damping of a standing controller, N·m·s/rad.
    pub standing_hip_kd: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            frequency: 4.0,
            clearance: 0.11,
            duty: 0.55,
            nominal_foot: [0.0, -0.48],
            kp: 1000.0,
            kd: 10.0,
            phase_offsets: [0.0, PI],
            velocity_gain: 1.0,
            velocity_correction_limit: 0.5,
            max_acceleration: 1.0,
            placement_gain: 0.2,
            placement_limit: 0.15,
            stance_hip_scale: 0.1,
            attitude_kp: 300.0,
            attitude_kd: 10.0,
            standing_hip_kd: 100.0,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.frequency > 0.0) {
            return Err(ConfigError::invalid("gait.frequency", "must be positive"));
        }
        if !(self.clearance >= 0.0) {
            return Err(ConfigError::invalid("gait.clearance", "must be non-negative"));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(ConfigError::invalid("gait.duty", "must lie in (0, 1)"));
        }
        if !(self.kp > 0.0) {
            return Err(ConfigError::invalid("gait.kp", "must be positive"));
        }
        if !(self.kd > 0.0) {
            return Err(ConfigError::invalid("gait.kd", "must be positive"));
        }
        if !(self.velocity_gain >= 0.0 && self.velocity_correction_limit >= 0.0) {
            return Err(ConfigError::invalid("gait.velocity_gain", "must be non-negative"));
        }
        if !(self.placement_gain >= 0.0 && self.placement_limit >= 0.0) {
            return Err(ConfigError::invalid("gait.placement_gain", "must be non-negative"));
        }
        if !(self.stance_hip_scale >= 0.0 && self.attitude_kp >= 0.0 && self.attitude_kd >= 0.0 && self.standing_hip_kd >= 0.0) {
            return Err(ConfigError::invalid("gait.attitude_kp", "stance gains must be non-negative"));
        }
        if !(self.max_acceleration > 0.0) {
            return Err(ConfigError::invalid("gait.max_acceleration", "must be positive"));
        }
        if !(self.nominal_foot[1] < 0.0) {
            return Err(ConfigError::invalid("gait.nominal_foot", "foot must sit below the hip"));
        }
        Ok(())
    }
}

/// Horizontal half-step: body travel over half a stride period.
pub fn half_step(command: f64, frequency: f64) -> f64 {
    command / (2.0 * frequency)
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Foot target relative to the hip for a leg at `phase`.
///
/// Stance occupies `[0, 2π·duty)` and sweeps the foot backwards along the
/// ground line; swing returns it along a smoothstep with a bump of height
/// `clearance`.
pub fn ftg_foot_target(phase: f64, params: &GaitParams, command: f64) -> Vec2 {
    let phase = phase.rem_euclid(TAU);
    let sweep = half_step(command, params.frequency) * params.duty;
    let stance_end = TAU * params.duty;
    let (dx, dz) = if phase < stance_end {
        let s = phase / stance_end;
        (sweep * (1.0 - 2.0 * s), 0.0)
    } else {
        let s = (phase - stance_end) / (TAU - stance_end);
        let bump = if s < 0.5 { smoothstep(2.0 * s) } else { smoothstep(2.0 - 2.0 * s) };
        (-sweep + 2.0 * sweep * smoothstep(s), params.clearance * bump)
    };
    Vec2::new(params.nominal_foot[0] + dx, params.nominal_foot[1] + dz)
}

pub fn in_stance(phase: f64, duty: f64) -> bool {
    phase.rem_euclid(TAU) < TAU * duty
}

/// Joint angles for a foot target in the hip frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub hip: f64,
    pub knee: f64,
    /// The target lay outside the reachable annulus and was moved onto it.
    pub clamped: bool,
}

/// Foot position in the hip frame.
pub fn leg_fk(thigh: f64, shank: f64, hip: f64, knee: f64) -> Vec2 {
    let (sh, ch) = hip.sin_cos();
    let (shk, chk) = (hip + knee).sin_cos();
    Vec2::new(thigh * sh + shank * shk, -thigh * ch - shank * chk)
}

/// Two-link inverse kinematics on the knee-backward (`knee ≥ 0`) branch.
pub fn leg_ik(thigh: f64, shank: f64, target: Vec2) -> IkSolution {
    let inner = (thigh - shank).abs() + IK_EPS;
    let outer = thigh + shank - IK_EPS;
    let d = target.norm();
    let (p, clamped) = if d < inner {
        let dir = if d > 0.0 { target / d } else { Vec2::new(0.0, -1.0) };
        (dir * inner, true)
    } else if d > outer {
        (target * (outer / d), true)
    } else {
        (target, false)
    };
    let d2 = p.norm_squared();
    let c = ((d2 - thigh * thigh - shank * shank) / (2.0 * thigh * shank)).clamp(-1.0, 1.0);
    let knee = c.acos();
    let v = Vec2::new(shank * knee.sin(), -thigh - shank * knee.cos());
    let hip = p.y.atan2(p.x) - v.y.atan2(v.x);
    let hip = (hip + PI).rem_euclid(TAU) - PI;
    IkSolution { hip, knee, clamped }
}

pub fn leg_ik_for(leg: &Leg, target: Vec2) -> IkSolution {
    leg_ik(leg.thigh_len, leg.shank_len, target)
}

pub fn pd_torque(q_des: f64, q: f64, qd: f64, kp: f64, kd: f64, limit: f64) -> f64 {
    (kp * (q_des - q) - kd * qd).clamp(-limit, limit)
}

/// Piecewise-constant forward-velocity command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandSchedule {
    /// `(start time, command)` sorted by start time; the first starts at 0.
    pub segments: Vec<(f64, f64)>,
}

impl CommandSchedule {
    pub fn constant(v: f64) -> Self {
        Self { segments: vec![(0.0, v)] }
    }

    pub fn at(&self, t: f64) -> f64 {
        let i = self.segments.partition_point(|&(start, _)| start <= t);
        self.segments[i.saturating_sub(1)].1
    }
}

/// Command trace for a task; deterministic in `seed`.
pub fn command_schedule(task: &TaskSpec, seed: u64) -> CommandSchedule {
    match task.kind {
        TaskKind::Stand => CommandSchedule::constant(0.0),
        TaskKind::Forward1ms | TaskKind::Payload | TaskKind::Rough => CommandSchedule::constant(task.forward_speed),
        TaskKind::RandomCommands => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
            let range = task.command_range;
            let segments = (0..task.segments)
                .map(|i| (i as f64 * task.segment_duration, rng.gen_range(-range..=range)))
                .collect();
            CommandSchedule { segments }
        }
    }
}

/// Per-rollout controller state.
#[derive(Debug, Clone)]
pub struct GaitController {
    pub params: GaitParams,
    time: f64,
    velocity_correction: f64,
    command: Option<f64>,
    targets: Vec<f64>,
    previous: Vec<f64>,
    /// Per-leg horizontal foot shift: current, held through stance, and at liftoff.
    shift: Vec<f64>,
    held: Vec<f64>,
    liftoff: Vec<f64>,
    stance: Vec<bool>,
    /// Hold every leg at mid-stance instead of stepping.
    standing: bool,
    /// IK targets that were clamped to the reachable annulus.
    pub clamp_events: usize,
}

impl GaitController {
    pub fn new(params: GaitParams, joints: usize) -> Self {
        Self {
            params,
            time: 0.0,
            velocity_correction: 0.0,
            command: None,
            targets: vec![0.0; joints],
            previous: Vec::new(),
            shift: Vec::new(),
            held: Vec::new(),
            liftoff: Vec::new(),
            stance: Vec::new(),
            standing: false,
            clamp_events: 0,
        }
    }

    /// Controller that keeps all feet planted at the nominal stance.
    pub fn standing(params: GaitParams, joints: usize) -> Self {
        Self {
            standing: true,
            ..Self::new(params, joints)
        }
    }

    pub fn phase(&self, leg: usize) -> f64 {
        if self.standing {
            return PI * self.params.duty;
        }
        (TAU * self.params.frequency * self.time + self.params.phase_offsets[leg]).rem_euclid(TAU)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Joint targets for the current base state; advances the clock by `dt`.
    pub fn update(&mut self, model: &PlanarModel, q: &[f64], qd: &[f64], command: f64, dt: f64) -> &[f64] {
        let pitch = q[2];
        let velocity = qd[0];
        let step = self.params.max_acceleration * dt;
        let command = match self.command {
            Some(prev) => prev + (command - prev).clamp(-step, step),
            None => command,
        };
        self.command = Some(command);
        let limit = self.params.velocity_correction_limit;
        self.velocity_correction =
            (self.velocity_correction + self.params.velocity_gain * (command - velocity) * dt).clamp(-limit, limit);
        let effective = command + self.velocity_correction;
        self.previous.clone_from(&self.targets);
        let legs = model.legs.len();
        if self.shift.len() != legs {
            self.shift = vec![0.0; legs];
            self.held = vec![0.0; legs];
            self.liftoff = vec![0.0; legs];
            self.stance = (0..legs).map(|i| in_stance(self.phase(i), self.params.duty)).collect();
        }
        let placement = if self.standing {
            0.0
        } else {
            (self.params.placement_gain * (velocity - effective))
                .clamp(-self.params.placement_limit, self.params.placement_limit)
        };
        let (s, c) = (-pitch).sin_cos();
        for (i, leg) in model.legs.iter().enumerate() {
            let phase = self.phase(i);
            let stance = in_stance(phase, self.params.duty);
            if stance && !self.stance[i] {
                self.held[i] = self.shift[i];
            } else if !stance && self.stance[i] {
                self.liftoff[i] = self.held[i];
            }
            self.stance[i] = stance;
            self.shift[i] = if stance {
                self.held[i]
            } else {
                let progress = (phase - TAU * self.params.duty) / (TAU * (1.0 - self.params.duty));
                self.liftoff[i] + smoothstep(progress) * (placement - self.liftoff[i])
            };
            let mut world = ftg_foot_target(phase, &self.params, effective);
            world.x += self.shift[i];
            let body = Vec2::new(c * world.x - s * world.y, s * world.x + c * world.y);
            let sol = leg_ik_for(leg, body);
            if sol.clamped {
                self.clamp_events += 1;
            }
            self.targets[2 * i] = sol.hip;
            self.targets[2 * i + 1] = sol.knee;
        }
        if self.time == 0.0 {
            self.previous.clone_from(&self.targets);
        }
        self.time += dt;
        &self.targets
    }

    /// Joint torques toward the targets, blended linearly from the previous
    /// update's targets as `blend` goes from 0 to 1.
    ///
    /// Hips of legs in stance and in contact run softened position gains plus
    /// a shared body-pitch PD. A standing controller keeps full hip gains.
    pub fn torques(&self, model: &PlanarModel, q: &[f64], qd: &[f64], contact: &[bool], blend: f64, out: &mut [f64]) {
        let p = &self.params;
        let loaded = |leg: usize| self.stance.get(leg).copied().unwrap_or(false) && contact.get(leg).copied().unwrap_or(false);
        let stance_legs = (0..model.legs.len()).filter(|&l| loaded(l)).count();
        let attitude = if stance_legs > 0 {
            (p.attitude_kp * q[2] + p.attitude_kd * qd[2]) / stance_legs as f64
        } else {
            0.0
        };
        for (k, &j) in model.actuated.iter().enumerate() {
            let target = self.previous[k] + blend * (self.targets[k] - self.previous[k]);
            let leg = k / 2;
            let stance_hip = k % 2 == 0 && loaded(leg);
            out[k] = if stance_hip {
                let (s, kd) = if self.standing { (1.0, p.standing_hip_kd) } else { (p.stance_hip_scale, p.kd) };
                (s * (p.kp * (target - q[j]) - kd * qd[j]) + attitude).clamp(-model.torque_limit, model.torque_limit)
            } else {
                pd_torque(target, q[j], qd[j], p.kp, p.kd, model.torque_limit)
            };
        }
    }
}
