//! Planar rigid-body dynamics: kinematics, composite-rigid-body mass matrix
//! and recursive Newton–Euler bias forces.
//!
//! Spatial quantities are 3-vectors `(angular, linear x, linear z)` expressed
//! in body coordinates about the body origin.

use nalgebra::{DMatrix, DVector};

use super::model::{JointKind, PlanarModel};
use crate::cam::Vec2;
use crate::error::SimError;

#[inline]
fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
fn cross(u: Vec2, v: Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

#[inline]
fn rotate(angle: f64, v: Vec2) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Motion {
    w: f64,
    v: Vec2,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Force {
    n: f64,
    f: Vec2,
}

impl Motion {
    fn add(self, o: Motion) -> Motion {
        Motion { w: self.w + o.w, v: self.v + o.v }
    }

    fn scale(self, s: f64) -> Motion {
        Motion { w: self.w * s, v: self.v * s }
    }

    fn cross_motion(self, o: Motion) -> Motion {
        Motion {
            w: 0.0,
            v: perp(o.v) * self.w - perp(self.v) * o.w,
        }
    }

    fn cross_force(self, f: Force) -> Force {
        Force {
            n: cross(self.v, f.f),
            f: perp(f.f) * self.w,
        }
    }

    fn dot(self, f: Force) -> f64 {
        self.w * f.n + self.v.dot(&f.f)
    }
}

impl Force {
    fn add(self, o: Force) -> Force {
        Force { n: self.n + o.n, f: self.f + o.f }
    }
}

/// Parent-to-child transform: child origin `r` (parent coordinates) and
/// child rotation `theta` relative to the parent.
#[derive(Debug, Clone, Copy)]
struct Transform {
    r: Vec2,
    theta: f64,
}

impl Transform {
    fn motion(&self, m: Motion) -> Motion {
        Motion {
            w: m.w,
            v: rotate(-self.theta, m.v + perp(self.r) * m.w),
        }
    }

    /// Child force expressed in the parent frame.
    fn force_to_parent(&self, f: Force) -> Force {
        let fp = rotate(self.theta, f.f);
        Force {
            n: f.n + cross(self.r, fp),
            f: fp,
        }
    }

    fn inertia_to_parent(&self, i: Inertia) -> Inertia {
        let h = rotate(self.theta, i.h);
        Inertia {
            m: i.m,
            h: self.r * i.m + h,
            i_o: i.i_o + i.m * self.r.norm_squared() + 2.0 * self.r.dot(&h),
        }
    }
}

/// Planar spatial inertia: mass, first moment `m·c`, inertia about the origin.
#[derive(Debug, Clone, Copy, Default)]
struct Inertia {
    m: f64,
    h: Vec2,
    i_o: f64,
}

impl Inertia {
    fn of_body(mass: f64, com: Vec2, inertia: f64) -> Self {
        Self {
            m: mass,
            h: com * mass,
            i_o: inertia + mass * com.norm_squared(),
        }
    }

    fn apply(&self, m: Motion) -> Force {
        Force {
            n: self.i_o * m.w + cross(self.h, m.v),
            f: m.v * self.m + perp(self.h) * m.w,
        }
    }

    fn add(self, o: Inertia) -> Inertia {
        Inertia {
            m: self.m + o.m,
            h: self.h + o.h,
            i_o: self.i_o + o.i_o,
        }
    }
}

fn subspace(kind: JointKind) -> Motion {
    match kind {
        JointKind::PrismaticX => Motion { w: 0.0, v: Vec2::new(1.0, 0.0) },
        JointKind::PrismaticZ => Motion { w: 0.0, v: Vec2::new(0.0, 1.0) },
        JointKind::Revolute => Motion { w: 1.0, v: Vec2::zeros() },
    }
}

fn joint_transform(model: &PlanarModel, i: usize, q: f64) -> Transform {
    let b = &model.bodies[i];
    match b.joint {
        JointKind::PrismaticX => Transform { r: b.offset + Vec2::new(q, 0.0), theta: 0.0 },
        JointKind::PrismaticZ => Transform { r: b.offset + Vec2::new(0.0, q), theta: 0.0 },
        JointKind::Revolute => Transform { r: b.offset, theta: q },
    }
}

/// World pose of a body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub pos: Vec2,
    pub angle: f64,
}

impl Pose {
    pub fn point(&self, local: Vec2) -> Vec2 {
        self.pos + rotate(self.angle, local)
    }
}

/// World poses of all bodies.
pub fn body_poses(model: &PlanarModel, q: &[f64]) -> Vec<Pose> {
    let mut poses: Vec<Pose> = Vec::with_capacity(model.dof());
    for (i, b) in model.bodies.iter().enumerate() {
        let parent = b.parent.map(|p| poses[p]).unwrap_or(Pose {
            pos: Vec2::zeros(),
            angle: 0.0,
        });
        let x = joint_transform(model, i, q[i]);
        poses.push(Pose {
            pos: parent.point(x.r),
            angle: parent.angle + x.theta,
        });
    }
    poses
}

/// Joint-space mass matrix by composite-rigid-body accumulation.
pub fn mass_matrix(model: &PlanarModel, q: &[f64]) -> DMatrix<f64> {
    let n = model.dof();
    let xs: Vec<Transform> = (0..n).map(|i| joint_transform(model, i, q[i])).collect();
    let mut composite: Vec<Inertia> = model
        .bodies
        .iter()
        .map(|b| Inertia::of_body(b.mass, b.com, b.inertia))
        .collect();
    for i in (0..n).rev() {
        if let Some(p) = model.bodies[i].parent {
            let moved = xs[i].inertia_to_parent(composite[i]);
            composite[p] = composite[p].add(moved);
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let s = subspace(model.bodies[i].joint);
        let mut f = composite[i].apply(s);
        m[(i, i)] = s.dot(f);
        let mut j = i;
        while let Some(p) = model.bodies[j].parent {
            f = xs[j].force_to_parent(f);
            j = p;
            let v = subspace(model.bodies[j].joint).dot(f);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Generalized bias force `h(q, q̇) = C(q, q̇) q̇ + g(q)`.
pub fn bias_forces(model: &PlanarModel, q: &[f64], qd: &[f64]) -> DVector<f64> {
    let n = model.dof();
    let xs: Vec<Transform> = (0..n).map(|i| joint_transform(model, i, q[i])).collect();
    // Gravity as an upward acceleration of the world frame.
    let root_acc = Motion {
        w: 0.0,
        v: Vec2::new(0.0, model.gravity),
    };
    let mut vel = vec![Motion::default(); n];
    let mut acc = vec![Motion::default(); n];
    let mut force = vec![Force::default(); n];
    for i in 0..n {
        let b = &model.bodies[i];
        let s = subspace(b.joint);
        let vj = s.scale(qd[i]);
        let (vp, ap) = match b.parent {
            Some(p) => (vel[p], acc[p]),
            None => (Motion::default(), root_acc),
        };
        // World-frame root: express parent quantities in the child frame.
        vel[i] = xs[i].motion(vp).add(vj);
        acc[i] = xs[i].motion(ap).add(vel[i].cross_motion(vj));
        let inertia = Inertia::of_body(b.mass, b.com, b.inertia);
        force[i] = inertia.apply(acc[i]).add(vel[i].cross_force(inertia.apply(vel[i])));
    }
    let mut tau = DVector::zeros(n);
    for i in (0..n).rev() {
        let s = subspace(model.bodies[i].joint);
        tau[i] = s.dot(force[i]);
        if let Some(p) = model.bodies[i].parent {
            let moved = xs[i].force_to_parent(force[i]);
            force[p] = force[p].add(moved);
        }
    }
    tau
}

/// Linear Jacobian (2 × n) of a point fixed on `body`, given in body
/// coordinates.
pub fn point_jacobian(model: &PlanarModel, poses: &[Pose], body: usize, local: Vec2) -> [Vec<f64>; 2] {
    let n = model.dof();
    let p = poses[body].point(local);
    let mut jx = vec![0.0; n];
    let mut jz = vec![0.0; n];
    let mut k = Some(body);
    while let Some(i) = k {
        let b = &model.bodies[i];
        let parent_angle = b.parent.map(|pp| poses[pp].angle).unwrap_or(0.0);
        match b.joint {
            JointKind::PrismaticX => {
                let d = rotate(parent_angle, Vec2::new(1.0, 0.0));
                jx[i] = d.x;
                jz[i] = d.y;
            }
            JointKind::PrismaticZ => {
                let d = rotate(parent_angle, Vec2::new(0.0, 1.0));
                jx[i] = d.x;
                jz[i] = d.y;
            }
            JointKind::Revolute => {
                let d = perp(p - poses[i].pos);
                jx[i] = d.x;
                jz[i] = d.y;
            }
        }
        k = b.parent;
    }
    [jx, jz]
}

pub fn kinetic_energy(model: &PlanarModel, q: &[f64], qd: &[f64]) -> f64 {
    let m = mass_matrix(model, q);
    let v = DVector::from_column_slice(qd);
    0.5 * v.dot(&(&m * &v))
}

pub fn potential_energy(model: &PlanarModel, q: &[f64]) -> f64 {
    body_poses(model, q)
        .iter()
        .zip(&model.bodies)
        .map(|(pose, b)| b.mass * model.gravity * pose.point(b.com).y)
        .sum()
}

/// World position of the whole-body centre of mass.
pub fn center_of_mass(model: &PlanarModel, q: &[f64]) -> Vec2 {
    let poses = body_poses(model, q);
    let mut acc = Vec2::zeros();
    let mut mass = 0.0;
    for (pose, b) in poses.iter().zip(&model.bodies) {
        acc += pose.point(b.com) * b.mass;
        mass += b.mass;
    }
    acc / mass
}

/// Solves `M q̈ = rhs`, failing if `M` is not positive definite.
pub fn solve_mass(m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>, SimError> {
    let chol = m.cholesky().ok_or(SimError::SingularMass)?;
    Ok(chol.solve(rhs))
}

/// Generalized accelerations for the given generalized forces (actuator,
/// spring and contact contributions already mapped to joint space).
pub fn forward_dynamics(
    model: &PlanarModel,
    q: &[f64],
    qd: &[f64],
    generalized_force: &DVector<f64>,
) -> Result<DVector<f64>, SimError> {
    let h = bias_forces(model, q, qd);
    solve_mass(mass_matrix(model, q), &(generalized_force - h))
}
