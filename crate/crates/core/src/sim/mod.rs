//! Sagittal-plane quadruped simulation.

pub mod contact;
pub mod dynamics;
pub mod model;
pub mod reward;
pub mod rollout;

use nalgebra::{DMatrix, DVector};

use crate::cam::{CamDesign, CamSpring, MechanismLayout, Vec2};
use crate::error::SimError;
pub use contact::{ContactParams, FootForce, Terrain};
pub use model::{build_model, ModelConfig, PlanarModel};
pub use reward::{reward, RewardBreakdown, RewardInputs, RewardWeights};
pub use rollout::{cotr, rollout, rollout_detailed, RolloutFailure, RolloutResult, RolloutSetup, SimSettings, TraceRow};

const BLOWUP: f64 = 1e6;

/// Generalized state of a planar model.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub time: f64,
    /// Per-foot contact flag from the last step.
    pub contact: Vec<bool>,
    /// Per-foot accumulated slip distance, m.
    pub slip: Vec<f64>,
    /// Number of steps on which some joint sat outside its limits.
    pub limit_events: usize,
}

impl SimState {
    pub fn new(model: &PlanarModel, q: Vec<f64>, qd: Vec<f64>) -> Self {
        assert_eq!(q.len(), model.dof());
        assert_eq!(qd.len(), model.dof());
        Self {
            q,
            qd,
            time: 0.0,
            contact: vec![false; model.legs.len()],
            slip: vec![0.0; model.legs.len()],
            limit_events: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qd).all(|v| v.is_finite())
    }
}

/// Cam springs on the knees, one per planar leg.
#[derive(Debug, Clone)]
pub struct KneeSprings {
    springs: Vec<CamSpring>,
}

impl KneeSprings {
    pub fn new(designs: &[CamDesign], layout: &MechanismLayout) -> Result<Self, SimError> {
        let springs = designs
            .iter()
            .map(|d| CamSpring::for_simulation(d, layout))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { springs })
    }

    pub fn uniform(design: &CamDesign, layout: &MechanismLayout, legs: usize) -> Result<Self, SimError> {
        Self::new(&vec![*design; legs], layout)
    }

    /// Torque of one physical spring on leg `leg` at knee angle `q`.
    pub fn torque(&self, leg: usize, q: f64) -> f64 {
        self.springs[leg].torque(q).map(|s| s.torque).unwrap_or(0.0)
    }

    pub fn energy(&self, leg: usize, q: f64) -> f64 {
        self.springs[leg].energy(q).unwrap_or(0.0)
    }
}

/// Inputs to one physics step.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    /// Motor torques in `model.actuated` order; clamped to the torque limit.
    pub torques: &'a [f64],
    pub springs: Option<&'a KneeSprings>,
    /// `None` disables ground contact.
    pub contact: Option<&'a ContactParams>,
    pub terrain: &'a Terrain,
    /// External base force (x, z) and pitch torque.
    pub base_wrench: [f64; 3],
    pub dt: f64,
}

/// Quantities applied during a step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub torques: Vec<f64>,
    /// Total spring torque per knee (all physical springs of the leg).
    pub spring_torques: Vec<f64>,
    pub feet: Vec<FootForce>,
}

/// Foot position and velocity of each leg.
pub fn foot_states(model: &PlanarModel, q: &[f64], qd: &[f64]) -> Vec<(Vec2, Vec2)> {
    let poses = dynamics::body_poses(model, q);
    model
        .legs
        .iter()
        .map(|leg| {
            let local = Vec2::new(0.0, -leg.shank_len);
            let [jx, jz] = dynamics::point_jacobian(model, &poses, leg.knee, local);
            let v = Vec2::new(dot(&jx, qd), dot(&jz, qd));
            (poses[leg.knee].point(local), v)
        })
        .collect()
}

/// Contact forces at each foot under the explicit regularized law.
pub fn contact_forces(model: &PlanarModel, state: &SimState, params: &ContactParams, terrain: &Terrain) -> Vec<FootForce> {
    foot_states(model, &state.q, &state.qd)
        .into_iter()
        .map(|(p, v)| contact::contact_force(params, terrain, p, v))
        .collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Advances the state by one semi-implicit Euler step.
///
/// Friction is the regularized Coulomb law evaluated at the end-of-step slip
/// velocity (a linear solve over the feet in contact, then clamped to the
/// friction cone), which keeps stiff sticking stable at millisecond steps.
pub fn step(model: &PlanarModel, state: &mut SimState, input: &StepInput) -> Result<StepOutput, SimError> {
    let n = model.dof();
    let dt = input.dt;
    let mut gen = DVector::zeros(n);

    let torques: Vec<f64> = input
        .torques
        .iter()
        .map(|t| t.clamp(-model.torque_limit, model.torque_limit))
        .collect();
    for (&j, &t) in model.actuated.iter().zip(&torques) {
        gen[j] += t;
    }

    let mut spring_torques = vec![0.0; model.legs.len()];
    if let Some(springs) = input.springs {
        for (i, leg) in model.legs.iter().enumerate() {
            let t = springs.torque(i, state.q[leg.knee]) * model.springs_per_knee;
            if t != 0.0 {
                gen[leg.knee] += t;
                spring_torques[i] = t;
            }
        }
    }

    if model.base.is_some() && input.base_wrench != [0.0; 3] {
        for k in 0..3 {
            gen[k] += input.base_wrench[k];
        }
    }

    let poses = dynamics::body_poses(model, &state.q);
    let mut feet = vec![FootForce::default(); model.legs.len()];
    // (leg, tangential jacobian row, normal force)
    let mut sticking: Vec<(usize, DVector<f64>, f64)> = Vec::new();
    if let Some(params) = input.contact {
        for (i, leg) in model.legs.iter().enumerate() {
            let local = Vec2::new(0.0, -leg.shank_len);
            let [jx, jz] = dynamics::point_jacobian(model, &poses, leg.knee, local);
            let pos = poses[leg.knee].point(local);
            let vel = Vec2::new(dot(&jx, &state.qd), dot(&jz, &state.qd));
            let (fn_, touching) = contact::normal_force(params, input.terrain, pos, vel);
            feet[i].in_contact = touching;
            if touching {
                feet[i].normal = fn_;
                for k in 0..n {
                    gen[k] += jz[k] * fn_;
                }
                if fn_ > 0.0 && params.friction > 0.0 {
                    sticking.push((i, DVector::from_vec(jx), fn_));
                }
            }
        }
    }

    let mass = dynamics::mass_matrix(model, &state.q);
    let chol = mass.cholesky().ok_or(SimError::SingularMass)?;
    let bias = dynamics::bias_forces(model, &state.q, &state.qd);
    let mut acc = chol.solve(&(gen - bias));

    if let (Some(params), false) = (input.contact, sticking.is_empty()) {
        let k = sticking.len();
        let qd = DVector::from_column_slice(&state.qd);
        let minv_j: Vec<DVector<f64>> = sticking.iter().map(|(_, j, _)| chol.solve(j)).collect();
        let mut lhs = DMatrix::identity(k, k);
        let mut rhs = DVector::zeros(k);
        for a in 0..k {
            let (_, ja, fn_a) = &sticking[a];
            let damping = params.friction * fn_a / params.reg_velocity;
            let v_free = ja.dot(&(&qd + &acc * dt));
            rhs[a] = -damping * v_free;
            for b in 0..k {
                lhs[(a, b)] += dt * damping * ja.dot(&minv_j[b]);
            }
        }
        let forces = lhs.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k));
        for (a, (leg, _, fn_a)) in sticking.iter().enumerate() {
            let cap = params.friction * fn_a;
            let f = forces[a].clamp(-cap, cap);
            feet[*leg].tangential = f;
            acc += &minv_j[a] * f;
        }
    }

    for i in 0..n {
        state.qd[i] += dt * acc[i];
        state.q[i] += dt * state.qd[i];
    }
    state.time += dt;

    if let Some(params) = input.contact {
        let post = foot_states(model, &state.q, &state.qd);
        for (i, f) in feet.iter().enumerate() {
            state.contact[i] = f.in_contact;
            let speed = post[i].1.x.abs();
            if f.in_contact && speed > params.reg_velocity {
                state.slip[i] += speed * dt;
            }
        }
    }

    let outside = model
        .actuated
        .iter()
        .zip(&model.limits)
        .any(|(&j, l)| state.q[j] < l.lower || state.q[j] > l.upper);
    if outside {
        state.limit_events += 1;
    }

    if !state.is_finite() || state.q.iter().chain(&state.qd).any(|v| v.abs() > BLOWUP) {
        return Err(SimError::NumericalBlowup { time: state.time });
    }

    Ok(StepOutput {
        torques,
        spring_torques,
        feet,
    })
}
