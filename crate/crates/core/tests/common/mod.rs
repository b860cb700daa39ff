#![allow(dead_code)]

use std::f64::consts::TAU;

use pecam_core::cam::{cam_boundary, cam_boundary_tangent, CamDesign, MechanismLayout, Vec2};
use rand::Rng;

pub fn cross(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

/// Random design with both axes well inside the anchor radius.
pub fn random_design<R: Rng>(rng: &mut R) -> CamDesign {
    CamDesign::new(
        rng.gen_range(-0.2..1.0),
        rng.gen_range(0.01..0.12),
        rng.gen_range(0.01..0.12),
        rng.gen_range(-3.14..3.14),
        4154.0,
    )
}

/// Tangent parameter by dense scan of the tangency residual, restricted to
/// the counter-clockwise wrapping side, refined by bisection on the sign
/// change. Independent of the affine closed form.
pub fn scan_tangent(design: &CamDesign, layout: &MechanismLayout, q: f64, n: usize) -> f64 {
    let anchor = layout.anchor();
    let residual = |t: f64| {
        let p = cam_boundary(design, q, t);
        cross(&(anchor - p), &cam_boundary_tangent(design, q, t))
    };
    let ccw = |t: f64| {
        let p = cam_boundary(design, q, t);
        (p - anchor).dot(&cam_boundary_tangent(design, q, t)) > 0.0
    };
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let t = TAU * i as f64 / n as f64;
        let r = residual(t).abs();
        if r < best.0 && ccw(t) {
            best = (r, t);
        }
    }
    let h = TAU / n as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    if residual(lo).signum() == residual(best.1).signum() {
        lo = best.1;
    } else {
        hi = best.1;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if residual(mid).signum() == residual(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).rem_euclid(TAU)
}

pub fn angle_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Arc length of the ellipse between two parameters by a dense polyline.
pub fn polyline_arc(a: f64, b: f64, from: f64, to: f64, segments: usize) -> f64 {
    let point = |t: f64| Vec2::new(a * t.cos(), b * t.sin());
    let mut len = 0.0;
    let mut prev = point(from);
    for i in 1..=segments {
        let p = point(from + (to - from) * i as f64 / segments as f64);
        len += (p - prev).norm();
        prev = p;
    }
    len * (to - from).signum()
}
