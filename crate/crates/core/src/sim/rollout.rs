//! Closed-loop episodes and their aggregate metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::contact::{ContactParams, Terrain};
use super::model::PlanarModel;
use super::reward::{reward, RewardBreakdown, RewardInputs, RewardWeights};
use super::{step, KneeSprings, SimState, StepInput};
use crate::cam::{CamDesign, MechanismLayout};
use crate::error::{ConfigError, OptError, SimError};
use crate::gait::{command_schedule, leg_ik_for, GaitController, GaitParams};
use crate::task::{TaskKind, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    /// Physics step, s.
    pub dt: f64,
    pub control_hz: f64,
    /// Base height below which the episode counts as a fall, m.
    pub fall_height: f64,
    /// Pitch magnitude beyond which the episode counts as a fall, rad.
    pub fall_pitch: f64,
    /// Shortest travel for which CoTr is reported, m.
    pub min_distance: f64,
    /// Keep per-control-step rows in the result.
    pub record_trace: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            control_hz: 100.0,
            fall_height: 0.25,
            fall_pitch: 1.0,
            min_distance: 0.1,
            record_trace: true,
        }
    }
}

impl SimSettings {
    /// Coarser step used for Monte-Carlo design studies.
    pub fn desk() -> Self {
        Self {
            dt: 5e-4,
            record_trace: false,
            ..Self::default()
        }
    }

    pub fn decimation(&self) -> usize {
        ((1.0 / (self.control_hz * self.dt)).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0) {
            return Err(ConfigError::invalid("sim.dt", "must be positive"));
        }
        if !(self.control_hz > 0.0) || self.control_hz * self.dt > 1.0 {
            return Err(ConfigError::invalid("sim.control_hz", "must be positive and at most 1/dt"));
        }
        if !(self.fall_pitch > 0.0) {
            return Err(ConfigError::invalid("sim.fall_pitch", "must be positive"));
        }
        if !(self.min_distance > 0.0) {
            return Err(ConfigError::invalid("sim.min_distance", "must be positive"));
        }
        Ok(())
    }
}

/// Everything about an episode that does not depend on the design or seed.
#[derive(Debug, Clone)]
pub struct RolloutSetup {
    pub model: PlanarModel,
    pub gait: GaitParams,
    pub contact: ContactParams,
    pub layout: MechanismLayout,
    pub weights: RewardWeights,
    pub settings: SimSettings,
}

/// State and signals at the end of one control interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    /// Motor torques applied on the last physics step.
    pub tau: Vec<f64>,
    pub tau_spring: Vec<f64>,
    pub contact: Vec<bool>,
    pub command: f64,
    pub reward: RewardBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub trace: Vec<TraceRow>,
    /// Mean per-step reward over the executed control steps.
    pub mean_reward: f64,
    /// Sum over the executed control steps of each reward term.
    pub reward_sums: RewardBreakdown,
    /// Trapezoidal ∫Σ τ² dt over the motor torques, N²·m²·s.
    pub torque_sq_integral: f64,
    /// Base path length ∫|ẋ| dt, m.
    pub distance: f64,
    /// Net forward displacement, m.
    pub displacement: f64,
    /// Mean |v_x − command| over control steps, m/s.
    pub tracking_error: f64,
    /// Mean |motor torque| at the knees, N·m.
    pub mean_abs_knee_torque: f64,
    /// Mean |motor torque| over all joints, N·m.
    pub mean_abs_torque: f64,
    pub peak_knee_torque: f64,
    pub fell: bool,
    pub duration: f64,
    pub steps: usize,
    pub total_mass: f64,
    pub gravity: f64,
    pub friction: f64,
    pub ik_clamps: usize,
    pub limit_events: usize,
    pub cotr: Option<f64>,
}

impl RolloutResult {
    /// Episode value entering the design objective: the mean reward, or
    /// `fall_reward` if the robot fell.
    pub fn episode_reward(&self, fall_reward: f64) -> f64 {
        if self.fell {
            fall_reward
        } else {
            self.mean_reward
        }
    }
}

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples {
        [] | [_] => 0.0,
        [first, .., last] => dt * (samples.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

/// Torque-square cost of transport `∫τ²dt / (m g Δs)`.
pub fn cotr(torque_sq_integral: f64, mass: f64, gravity: f64, distance: f64, min_distance: f64) -> Result<f64, OptError> {
    if !(distance > min_distance) {
        return Err(OptError::InsufficientDistance {
            distance,
            min: min_distance,
        });
    }
    Ok(torque_sq_integral / (mass * gravity * distance))
}

struct Push {
    start: f64,
    end: f64,
    wrench: [f64; 3],
}

fn sample_pushes(task: &TaskSpec, rng: &mut ChaCha8Rng) -> Vec<Push> {
    let spec = task.pushes;
    let mut pushes = Vec::new();
    if !spec.enabled() {
        return pushes;
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        t += -u.ln() * spec.mean_interval;
        if t >= task.duration {
            break;
        }
        let wrench = [
            rng.gen_range(-1.0..=1.0) * spec.max_force,
            rng.gen_range(-1.0..=1.0) * spec.max_force,
            rng.gen_range(-1.0..=1.0) * spec.max_torque,
        ];
        pushes.push(Push {
            start: t,
            end: t + spec.duration,
            wrench,
        });
    }
    pushes
}

fn perturbed(design: &CamDesign, scale: f64, u: [f64; 3]) -> CamDesign {
    CamDesign {
        q_bar: design.q_bar + scale * u[0],
        a: design.a * (1.0 + scale * u[1]),
        b: design.b * (1.0 + scale * u[2]),
        ..*design
    }
}

/// Initial configuration with both feet on the nominal stance line.
fn initial_state(setup: &RolloutSetup, controller: &GaitController, rng: &mut ChaCha8Rng, command: f64) -> SimState {
    let model = &setup.model;
    let gait = &setup.gait;
    let mut q = vec![0.0; model.dof()];
    let mut qd = vec![0.0; model.dof()];
    q[1] = -gait.nominal_foot[1] - 0.003 + rng.gen_range(-0.01..=0.01);
    q[2] = rng.gen_range(-0.02..=0.02);
    qd[0] = command + rng.gen_range(-0.05..=0.05);
    for (i, leg) in model.legs.iter().enumerate() {
        let mut target = crate::gait::ftg_foot_target(controller.phase(i), gait, command);
        target.y = gait.nominal_foot[1];
        let (s, c) = (-q[2]).sin_cos();
        let body = crate::cam::Vec2::new(c * target.x - s * target.y, s * target.x + c * target.y);
        let sol = leg_ik_for(leg, body);
        q[leg.hip] = sol.hip;
        q[leg.knee] = sol.knee;
    }
    SimState::new(model, q, qd)
}

/// Runs one closed-loop episode.
///
/// `design == None` disables the knee springs. The seed fixes friction,
/// terrain, pushes, the initial state, the command schedule and the optional
/// per-leg design perturbation.
pub fn rollout(
    setup: &RolloutSetup,
    design: Option<&CamDesign>,
    task: &TaskSpec,
    seed: u64,
) -> Result<RolloutResult, SimError> {
    rollout_detailed(setup, design, task, seed).map_err(|f| f.error)
}

/// A failed episode with the state at the start of the failing control
/// interval and the trace recorded up to it.
#[derive(Debug, Clone)]
pub struct RolloutFailure {
    pub error: SimError,
    pub last_good: Option<SimState>,
    pub trace: Vec<TraceRow>,
}

impl From<SimError> for RolloutFailure {
    fn from(error: SimError) -> Self {
        Self {
            error,
            last_good: None,
            trace: Vec::new(),
        }
    }
}

/// Same as [`rollout`], keeping the last good state on failure.
pub fn rollout_detailed(
    setup: &RolloutSetup,
    design: Option<&CamDesign>,
    task: &TaskSpec,
    seed: u64,
) -> Result<RolloutResult, RolloutFailure> {
    let settings = &setup.settings;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let friction = if task.friction_range[0] < task.friction_range[1] {
        rng.gen_range(task.friction_range[0]..=task.friction_range[1])
    } else {
        task.friction_range[0]
    };
    let contact = ContactParams { friction, ..setup.contact };
    let terrain = Terrain::rough(task.roughness, &mut rng);
    let pushes = sample_pushes(task, &mut rng);
    let factors: Vec<[f64; 3]> = (0..setup.model.legs.len())
        .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
        .collect();
    let model = setup.model.clone().with_payload(task.payload_kg);
    let springs = match design {
        Some(d) => {
            let designs: Vec<CamDesign> = factors.iter().map(|&u| perturbed(d, task.design_perturbation, u)).collect();
            Some(KneeSprings::new(&designs, &setup.layout)?)
        }
        None => None,
    };
    let schedule = command_schedule(task, seed);
    let joints = model.actuated.len();
    let mut controller = if task.kind == TaskKind::Stand {
        GaitController::standing(setup.gait.clone(), joints)
    } else {
        GaitController::new(setup.gait.clone(), joints)
    };
    let mut state = initial_state(setup, &controller, &mut rng, schedule.at(0.0));

    let dt = settings.dt;
    let decimation = settings.decimation();
    let control_dt = dt * decimation as f64;
    let intervals = (task.duration / control_dt).round() as usize;
    let knees: Vec<usize> = model
        .actuated
        .iter()
        .enumerate()
        .filter(|(_, j)| model.legs.iter().any(|l| l.knee == **j))
        .map(|(k, _)| k)
        .collect();

    let mut actions: [Vec<f64>; 3] = Default::default();
    let mut torques = vec![0.0; joints];
    let mut last_output = None;
    let mut trace = Vec::new();
    let mut reward_sums = RewardBreakdown::default();
    let mut reward_total = 0.0;
    let mut tracking_sum = 0.0;
    let mut torque_sq_integral = 0.0;
    let mut prev_torque_sq: Option<f64> = None;
    let mut distance = 0.0;
    let mut abs_knee = 0.0;
    let mut abs_all = 0.0;
    let mut peak_knee: f64 = 0.0;
    let mut physics_steps = 0usize;
    let mut executed = 0usize;
    let mut fell = false;
    let x0 = state.q[0];

    for _ in 0..intervals {
        let snapshot = state.clone();
        let command = schedule.at(state.time);
        let targets = controller.update(&model, &state.q, &state.qd, command, control_dt).to_vec();
        actions.rotate_right(1);
        actions[0] = targets;
        if actions[1].is_empty() {
            actions[1] = actions[0].clone();
            actions[2] = actions[0].clone();
        }
        let slip_before: f64 = state.slip.iter().sum();
        let mut sq_sum = vec![0.0; joints];
        for sub in 0..decimation {
            let blend = (sub + 1) as f64 / decimation as f64;
            controller.torques(&model, &state.q, &state.qd, &state.contact, blend, &mut torques);
            let wrench = pushes
                .iter()
                .find(|p| state.time >= p.start && state.time < p.end)
                .map(|p| p.wrench)
                .unwrap_or([0.0; 3]);
            let stepped = step(
                &model,
                &mut state,
                &StepInput {
                    torques: &torques,
                    springs: springs.as_ref(),
                    contact: Some(&contact),
                    terrain: &terrain,
                    base_wrench: wrench,
                    dt,
                },
            );
            let out = match stepped {
                Ok(out) => out,
                Err(error) => {
                    return Err(RolloutFailure {
                        error,
                        last_good: Some(snapshot),
                        trace,
                    })
                }
            };
            let tsq: f64 = out.torques.iter().map(|t| t * t).sum();
            if let Some(prev) = prev_torque_sq {
                torque_sq_integral += 0.5 * (prev + tsq) * dt;
            }
            prev_torque_sq = Some(tsq);
            for (acc, t) in sq_sum.iter_mut().zip(&out.torques) {
                *acc += t * t;
            }
            for &k in &knees {
                abs_knee += out.torques[k].abs();
                peak_knee = peak_knee.max(out.torques[k].abs());
            }
            abs_all += out.torques.iter().map(|t| t.abs()).sum::<f64>();
            distance += state.qd[0].abs() * dt;
            physics_steps += 1;
            last_output = Some(out);
        }
        let rms: Vec<f64> = sq_sum.iter().map(|s| (s / decimation as f64).sqrt()).collect();
        let joint_velocities: Vec<f64> = model.actuated.iter().map(|&j| state.qd[j]).collect();
        let r = reward(
            &RewardInputs {
                command,
                forward_velocity: state.qd[0],
                vertical_velocity: state.qd[1],
                pitch_rate: state.qd[2],
                actions: [&actions[0], &actions[1], &actions[2]],
                torques: &rms,
                joint_velocities: &joint_velocities,
                velocity_limit: model.velocity_limit,
                slip: state.slip.iter().sum::<f64>() - slip_before,
            },
            &setup.weights,
        );
        reward_total += r.total;
        reward_sums.tracking += r.tracking;
        reward_sums.base_motion += r.base_motion;
        reward_sums.action_smoothness += r.action_smoothness;
        reward_sums.torque += r.torque;
        reward_sums.velocity_limit += r.velocity_limit;
        reward_sums.slip += r.slip;
        reward_sums.total += r.total;
        tracking_sum += (state.qd[0] - command).abs();
        executed += 1;
        if settings.record_trace {
            let out = last_output.as_ref().expect("at least one physics step");
            trace.push(TraceRow {
                t: state.time,
                q: state.q.clone(),
                qd: state.qd.clone(),
                tau: out.torques.clone(),
                tau_spring: out.spring_torques.clone(),
                contact: state.contact.clone(),
                command,
                reward: r,
            });
        }
        if state.q[1] < settings.fall_height || state.q[2].abs() > settings.fall_pitch {
            fell = true;
            break;
        }
    }

    let n = executed.max(1) as f64;
    let steps = physics_steps.max(1) as f64;
    let cotr = cotr(torque_sq_integral, model.total_mass, model.gravity, distance, settings.min_distance).ok();
    Ok(RolloutResult {
        trace,
        mean_reward: reward_total / n,
        reward_sums,
        torque_sq_integral,
        distance,
        displacement: state.q[0] - x0,
        tracking_error: tracking_sum / n,
        mean_abs_knee_torque: abs_knee / (steps * knees.len().max(1) as f64),
        mean_abs_torque: abs_all / (steps * joints.max(1) as f64),
        peak_knee_torque: peak_knee,
        fell,
        duration: state.time,
        steps: executed,
        total_mass: model.total_mass,
        gravity: model.gravity,
        friction,
        ik_clamps: controller.clamp_events,
        limit_events: state.limit_events,
        cotr,
    })
}
