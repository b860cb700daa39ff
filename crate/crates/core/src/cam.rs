//! Elliptic-cam spring mechanism at the knee.
//!
//! A wire runs from an anchor fixed on the thigh, touches the cam tangentially,
//! wraps counter-clockwise along the cam boundary and is clamped to the cam.
//! The cam is an ellipse fixed to the shank, so it turns with the knee angle.
//! All geometry is expressed in a thigh-fixed frame centred on the knee whose
//! x axis is the shank axis at zero knee angle; the thigh axis (towards the
//! hip) is therefore `-x` and the anchor sits at `(-anchor_offset, 0)`.
//!
//! Positive knee angles rotate the cam counter-clockwise in this frame. With
//! the wire wrapped counter-clockwise the wire path lengthens monotonically as
//! the knee flexes, so a tension-only spring stretched past the equilibrium
//! angle produces an extending (negative) torque.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::CamError;
use crate::quadrature;

pub type Vec2 = Vector2<f64>;

/// Axis lengths below this are treated as this value when the other axis is
/// non-zero, so that the affine tangent construction stays defined.
const MIN_AXIS: f64 = 1e-9;

/// Absolute tolerance used for wire arc lengths, in metres.
pub const ARC_TOL: f64 = 1e-13;
const ARC_PANEL: f64 = PI / 16.0;

/// Cheaper arc tolerance used inside the simulator loop.
pub const SIM_ARC_TOL: f64 = 1e-10;
const SIM_ARC_PANEL: f64 = PI / 4.0;

/// Cam design vector plus spring constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CamDesign {
    /// Knee angle at which the spring is unstretched, rad.
    pub q_bar: f64,
    /// Cam radius along the local x axis, m.
    pub a: f64,
    /// Cam radius along the local y axis, m.
    pub b: f64,
    /// Cam orientation relative to the shank axis at zero knee angle, rad.
    pub phi0: f64,
    /// Linear spring stiffness, N/m.
    pub k_s: f64,
}

/// Stiffness of the spring used on the hardware build, N/m.
pub const DEFAULT_SPRING_STIFFNESS: f64 = 4154.0;

impl CamDesign {
    pub fn new(q_bar: f64, a: f64, b: f64, phi0: f64, k_s: f64) -> Self {
        Self { q_bar, a, b, phi0, k_s }
    }

    /// The optimized hardware design (q̄ = 0.36 rad, a = 8.1 cm, b = 6.0 cm).
    pub fn hardware() -> Self {
        Self::new(0.36, 0.081, 0.060, 0.0, DEFAULT_SPRING_STIFFNESS)
    }

    /// Zero-size cam: no lever arm and hence no torque.
    pub fn rigid() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, DEFAULT_SPRING_STIFFNESS)
    }

    pub fn circular(q_bar: f64, r: f64, k_s: f64) -> Self {
        Self::new(q_bar, r, r, 0.0, k_s)
    }

    pub fn is_rigid(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    /// Design vector `[q_bar, a, b, phi0]`.
    pub fn vector(&self) -> [f64; 4] {
        [self.q_bar, self.a, self.b, self.phi0]
    }

    pub fn validate(&self) -> Result<(), CamError> {
        let finite = [self.q_bar, self.a, self.b, self.phi0, self.k_s]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.a < 0.0 || self.b < 0.0 || self.k_s <= 0.0 {
            return Err(CamError::InvalidDesign(*self));
        }
        Ok(())
    }

    fn effective_axes(&self) -> (f64, f64) {
        (self.a.max(MIN_AXIS), self.b.max(MIN_AXIS))
    }
}

/// Where the wire is anchored on the thigh and clamped on the cam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismLayout {
    /// Anchor point in the knee frame, m.
    pub anchor: [f64; 2],
    /// Distance of the anchor from the knee centre along the thigh axis, m.
    pub anchor_offset: f64,
    /// Cam boundary parameter at which the wire is clamped, rad.
    pub termination_theta: f64,
}

impl MechanismLayout {
    pub fn on_thigh_axis(anchor_offset: f64) -> Self {
        Self {
            anchor: [-anchor_offset, 0.0],
            anchor_offset,
            termination_theta: PI,
        }
    }

    pub fn anchor(&self) -> Vec2 {
        Vec2::new(self.anchor[0], self.anchor[1])
    }
}

impl Default for MechanismLayout {
    fn default() -> Self {
        Self::on_thigh_axis(0.25)
    }
}

/// Solved wire geometry at one knee angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CamGeometry {
    /// Boundary parameter of the wire departure point, in `[0, 2π)`.
    pub theta_star: f64,
    /// Wire departure point on the cam, knee frame, m.
    pub lever_point: Vec2,
    /// Unit vector from the departure point towards the anchor.
    pub wire_dir: Vec2,
    /// Length of the free wire segment, m.
    pub straight_len: f64,
    /// Length of wire wrapped on the cam up to the clamp, m.
    pub wrapped_arc_len: f64,
}

impl CamGeometry {
    /// `<wire_dir, lever_point>`; the sign of the force/lever projection.
    pub fn force_lever_projection(&self) -> f64 {
        self.wire_dir.dot(&self.lever_point)
    }

    /// Signed perpendicular distance from the knee to the wire line, m.
    pub fn moment_arm(&self) -> f64 {
        cross(&self.lever_point, &self.wire_dir)
    }
}

#[inline]
pub(crate) fn cross(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

#[inline]
fn rotation(angle: f64) -> (f64, f64) {
    angle.sin_cos()
}

/// Point on the cam boundary, knee frame.
pub fn cam_boundary(design: &CamDesign, q: f64, theta: f64) -> Vec2 {
    let (s, c) = rotation(design.phi0 + q);
    let x = design.a * theta.cos();
    let y = design.b * theta.sin();
    Vec2::new(c * x - s * y, s * x + c * y)
}

/// Derivative of [`cam_boundary`] with respect to `theta`.
pub fn cam_boundary_tangent(design: &CamDesign, q: f64, theta: f64) -> Vec2 {
    let (s, c) = rotation(design.phi0 + q);
    let x = -design.a * theta.sin();
    let y = design.b * theta.cos();
    Vec2::new(c * x - s * y, s * x + c * y)
}

/// Arc-length density of the boundary, `sqrt(a² sin²θ + b² cos²θ)`.
#[inline]
pub fn arc_density(a: f64, b: f64, theta: f64) -> f64 {
    let s = theta.sin();
    (b * b + (a * a - b * b) * s * s).sqrt()
}

/// Cam arc length between two boundary parameters (signed).
pub fn arc_length(a: f64, b: f64, from: f64, to: f64, tol: f64) -> f64 {
    if a == b {
        return a * (to - from);
    }
    let panel = if tol < SIM_ARC_TOL { ARC_PANEL } else { SIM_ARC_PANEL };
    quadrature::integrate(|t| arc_density(a, b, t), from, to, tol, panel).value
}

/// Tangent solution with a continuously lifted boundary parameter.
#[derive(Debug, Clone, Copy)]
struct Tangent {
    theta: f64,
    point: Vec2,
    wire_dir: Vec2,
    straight: f64,
}

fn solve_tangent(design: &CamDesign, layout: &MechanismLayout, q: f64) -> Result<Option<Tangent>, CamError> {
    let anchor = layout.anchor();
    if design.is_rigid() {
        return Ok(None);
    }
    let (a, b) = design.effective_axes();
    let phi = design.phi0 + q;
    let (s, c) = rotation(phi);
    // Anchor in the cam body frame, then scaled onto the unit circle.
    let body = Vec2::new(c * anchor.x + s * anchor.y, -s * anchor.x + c * anchor.y);
    let u = Vec2::new(body.x / a, body.y / b);
    let rho = u.norm();
    if rho <= 1.0 + 1e-12 {
        return Err(CamError::NoTangent { q });
    }
    let reference = anchor.y.atan2(anchor.x) - phi;
    let mut alpha = u.y.atan2(u.x);
    alpha += TAU * ((reference - alpha) / TAU).round();
    let beta = (1.0 / rho).acos();
    // Counter-clockwise wrapping branch: travel from the anchor to the cam
    // continues along +d/dθ of the boundary.
    let theta = alpha + beta;
    let point = cam_boundary(design, q, theta);
    let to_anchor = anchor - point;
    let straight = to_anchor.norm();
    Ok(Some(Tangent {
        theta,
        point,
        wire_dir: to_anchor / straight,
        straight,
    }))
}

fn geometry_from(t: &Tangent, wrapped: f64) -> CamGeometry {
    CamGeometry {
        theta_star: t.theta.rem_euclid(TAU),
        lever_point: t.point,
        wire_dir: t.wire_dir,
        straight_len: t.straight,
        wrapped_arc_len: wrapped,
    }
}

fn rigid_geometry(layout: &MechanismLayout) -> CamGeometry {
    let anchor = layout.anchor();
    let len = anchor.norm();
    CamGeometry {
        theta_star: 0.0,
        lever_point: Vec2::zeros(),
        wire_dir: if len > 0.0 { anchor / len } else { Vec2::new(-1.0, 0.0) },
        straight_len: len,
        wrapped_arc_len: 0.0,
    }
}

/// Lifted clamp parameter: the first copy of `termination_theta` at least half
/// a turn ahead of the equilibrium departure point.
fn termination_lift(layout: &MechanismLayout, theta_eq: f64) -> f64 {
    let t = layout.termination_theta;
    t + TAU * ((theta_eq + PI - t) / TAU).ceil()
}

/// Solves the wire departure point at knee angle `q`.
pub fn tangent_point(design: &CamDesign, layout: &MechanismLayout, q: f64) -> Result<CamGeometry, CamError> {
    design.validate()?;
    let Some(t) = solve_tangent(design, layout, q)? else {
        return Ok(rigid_geometry(layout));
    };
    let eq = solve_tangent(design, layout, design.q_bar)?.expect("non-rigid");
    let (a, b) = design.effective_axes();
    let wrapped = arc_length(a, b, t.theta, termination_lift(layout, eq.theta), ARC_TOL);
    Ok(geometry_from(&t, wrapped))
}

/// Total wire path length from anchor to clamp, m.
pub fn wire_length(design: &CamDesign, layout: &MechanismLayout, q: f64) -> Result<f64, CamError> {
    let g = tangent_point(design, layout, q)?;
    Ok(g.straight_len + g.wrapped_arc_len)
}

/// Spring elongation relative to the equilibrium angle, m.
pub fn spring_elongation(design: &CamDesign, layout: &MechanismLayout, q: f64) -> Result<f64, CamError> {
    Ok(CamSpring::new(design, layout)?.elongation(q)?)
}

/// Spring torque on the knee, N·m. Positive torque drives the knee angle up.
///
/// Degenerate or unsolvable geometry yields zero.
pub fn spring_torque(design: &CamDesign, layout: &MechanismLayout, q: f64) -> f64 {
    match CamSpring::new(design, layout) {
        Ok(spring) => spring.torque(q).map(|s| s.torque).unwrap_or(0.0),
        Err(_) => 0.0,
    }
}

/// Spring state at one knee angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringState {
    pub torque: f64,
    pub elongation: f64,
    pub force: f64,
    pub theta_star: f64,
}

/// A cam design bound to a layout, with the equilibrium geometry cached.
#[derive(Debug, Clone)]
pub struct CamSpring {
    design: CamDesign,
    layout: MechanismLayout,
    equilibrium: Option<Tangent>,
    tol: f64,
}

impl CamSpring {
    pub fn new(design: &CamDesign, layout: &MechanismLayout) -> Result<Self, CamError> {
        Self::with_tolerance(design, layout, ARC_TOL)
    }

    /// Same as [`CamSpring::new`] with a looser arc tolerance for inner loops.
    pub fn for_simulation(design: &CamDesign, layout: &MechanismLayout) -> Result<Self, CamError> {
        Self::with_tolerance(design, layout, SIM_ARC_TOL)
    }

    fn with_tolerance(design: &CamDesign, layout: &MechanismLayout, tol: f64) -> Result<Self, CamError> {
        design.validate()?;
        let equilibrium = solve_tangent(design, layout, design.q_bar)?;
        Ok(Self {
            design: *design,
            layout: *layout,
            equilibrium,
            tol,
        })
    }

    pub fn design(&self) -> &CamDesign {
        &self.design
    }

    pub fn layout(&self) -> &MechanismLayout {
        &self.layout
    }

    /// Wire-length change relative to the equilibrium angle, m.
    pub fn elongation(&self, q: f64) -> Result<f64, CamError> {
        Ok(self.solve(q)?.map(|(_, dl)| dl).unwrap_or(0.0))
    }

    fn solve(&self, q: f64) -> Result<Option<(Tangent, f64)>, CamError> {
        let Some(eq) = self.equilibrium else {
            return Ok(None);
        };
        let t = solve_tangent(&self.design, &self.layout, q)?.expect("non-rigid");
        let (a, b) = self.design.effective_axes();
        // Wrapped length runs from the departure point to the clamp; only the
        // part between the two departure points differs.
        let arc = arc_length(a, b, t.theta, eq.theta, self.tol);
        Ok(Some((t, t.straight - eq.straight + arc)))
    }

    pub fn torque(&self, q: f64) -> Result<SpringState, CamError> {
        let Some((t, dl)) = self.solve(q)? else {
            return Ok(SpringState {
                torque: 0.0,
                elongation: 0.0,
                force: 0.0,
                theta_star: 0.0,
            });
        };
        let force = self.design.k_s * dl.max(0.0);
        let torque = if force > 0.0 { force * cross(&t.point, &t.wire_dir) } else { 0.0 };
        Ok(SpringState {
            torque,
            elongation: dl,
            force,
            theta_star: t.theta.rem_euclid(TAU),
        })
    }

    /// Stored elastic energy `½ k max(Δl, 0)²`, J.
    pub fn energy(&self, q: f64) -> Result<f64, CamError> {
        let dl = self.elongation(q)?.max(0.0);
        Ok(0.5 * self.design.k_s * dl * dl)
    }
}

/// One sample of a torque curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub q: f64,
    pub torque: f64,
    pub elongation: f64,
    pub theta_star: f64,
    pub valid: bool,
}

/// Uniformly sampled torque curve over `[q_min, q_max]`.
///
/// Angles without a tangent solution come back with `valid == false` and NaN
/// values rather than aborting the sweep.
pub fn torque_curve(
    design: &CamDesign,
    layout: &MechanismLayout,
    q_min: f64,
    q_max: f64,
    n: usize,
) -> Result<Vec<CurveSample>, CamError> {
    if n < 2 || !(q_min < q_max) {
        return Err(CamError::InvalidRange { q_min, q_max, n });
    }
    design.validate()?;
    let spring = CamSpring::new(design, layout).ok();
    let step = (q_max - q_min) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let q = if i + 1 == n { q_max } else { q_min + step * i as f64 };
            match spring.as_ref().map(|s| s.torque(q)) {
                Some(Ok(s)) => CurveSample {
                    q,
                    torque: s.torque,
                    elongation: s.elongation,
                    theta_star: s.theta_star,
                    valid: true,
                },
                _ => CurveSample {
                    q,
                    torque: f64::NAN,
                    elongation: f64::NAN,
                    theta_star: f64::NAN,
                    valid: false,
                },
            }
        })
        .collect())
}
