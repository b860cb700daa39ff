//! Spring sizing by static gravity compensation.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::cam::{spring_torque, CamDesign, MechanismLayout, Vec2};
use crate::error::OptError;
use crate::gait::leg_ik_for;
use crate::sim::dynamics::{bias_forces, body_poses, point_jacobian};
use crate::sim::PlanarModel;

/// Reference knee angle of the nominal stance, rad.
pub const DEFAULT_Q_REF: f64 = 1.3;

const BISECTION_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub q_bar: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstPrinciplesCurve {
    pub q_ref: f64,
    /// Static motor torque per planar knee without springs, N·m.
    pub required_torque: f64,
    pub points: Vec<BalancePoint>,
    /// Balancing design with the smallest `q_bar`.
    pub optimum: BalancePoint,
}

/// Standing configuration with every knee at `q_ref` and feet below the hips.
pub fn nominal_stance(model: &PlanarModel, q_ref: f64) -> Vec<f64> {
    let mut q = vec![0.0; model.dof()];
    let mut height: f64 = 0.0;
    for leg in &model.legs {
        let (l1, l2) = (leg.thigh_len, leg.shank_len);
        let d = (l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * q_ref.cos()).sqrt();
        let sol = leg_ik_for(leg, Vec2::new(0.0, -d));
        q[leg.hip] = sol.hip;
        q[leg.knee] = q_ref;
        height = height.max(d);
    }
    if model.base.is_some() {
        q[1] = height;
    }
    q
}

/// Per-knee motor torques holding the nominal stance against gravity.
///
/// Ground forces are vertical and split so the base is in equilibrium.
pub fn static_knee_torques(model: &PlanarModel, q_ref: f64) -> Vec<f64> {
    let q = nominal_stance(model, q_ref);
    let g = bias_forces(model, &q, &vec![0.0; model.dof()]);
    let poses = body_poses(model, &q);
    let jz: Vec<Vec<f64>> = model
        .legs
        .iter()
        .map(|leg| point_jacobian(model, &poses, leg.knee, Vec2::new(0.0, -leg.shank_len))[1].clone())
        .collect();
    // Vertical force on each foot from base z and pitch equilibrium.
    let forces = match jz.len() {
        2 => {
            let a = Matrix2::new(jz[0][1], jz[1][1], jz[0][2], jz[1][2]);
            a.lu()
                .solve(&nalgebra::Vector2::new(g[1], g[2]))
                .map(|f| vec![f[0], f[1]])
                .unwrap_or_else(|| vec![g[1] / 2.0; 2])
        }
        n => vec![g[1] / n as f64; n],
    };
    model
        .legs
        .iter()
        .map(|leg| {
            let j = leg.knee;
            g[j] - jz.iter().zip(&forces).map(|(row, f)| row[j] * f).sum::<f64>()
        })
        .collect()
}

/// Total spring torque at the knee for a circular cam of radius `r`.
fn spring_total(model: &PlanarModel, layout: &MechanismLayout, q_bar: f64, r: f64, k_s: f64, q: f64) -> f64 {
    model.springs_per_knee * spring_torque(&CamDesign::circular(q_bar, r, k_s), layout, q)
}

/// Radius on `[0, r_max]` whose spring torque at `q_ref` equals `required`.
pub fn balancing_radius(
    model: &PlanarModel,
    layout: &MechanismLayout,
    q_bar: f64,
    q_ref: f64,
    required: f64,
    r_max: f64,
    k_s: f64,
) -> Result<f64, OptError> {
    if required == 0.0 {
        return Ok(0.0);
    }
    let residual = |r: f64| spring_total(model, layout, q_bar, r, k_s, q_ref) - required;
    let (mut lo, mut hi) = (0.0, r_max);
    let f_lo = residual(lo);
    if f_lo.signum() == residual(hi).signum() {
        return Err(OptError::NoBalance { q_bar, required });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if residual(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Balancing curve over `n` values of `q_bar` in `q_bar_range`.
pub fn first_principles_design(
    model: &PlanarModel,
    layout: &MechanismLayout,
    q_ref: f64,
    q_bar_range: (f64, f64),
    n: usize,
    r_max: f64,
    k_s: f64,
) -> Result<FirstPrinciplesCurve, OptError> {
    let torques = static_knee_torques(model, q_ref);
    let required = torques.iter().sum::<f64>() / torques.len().max(1) as f64;
    let (lo, hi) = q_bar_range;
    let mut points = Vec::new();
    let mut last_err = None;
    for i in 0..n.max(1) {
        let q_bar = if n <= 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
        match balancing_radius(model, layout, q_bar, q_ref, required, r_max, k_s) {
            Ok(r) => points.push(BalancePoint { q_bar, r }),
            Err(e) => last_err = Some(e),
        }
    }
    let optimum = match points.iter().min_by(|a, b| a.q_bar.total_cmp(&b.q_bar)) {
        Some(p) => *p,
        None => return Err(last_err.unwrap_or(OptError::NoBalance { q_bar: lo, required })),
    };
    Ok(FirstPrinciplesCurve {
        q_ref,
        required_torque: required,
        points,
        optimum,
    })
}
