mod common;

use std::f64::consts::PI;

use common::*;
use pecam_core::cam::{
    cam_boundary_tangent, spring_elongation, tangent_point, torque_curve, wire_length, CamDesign, CamSpring,
    MechanismLayout,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn lever_torque_matches_energy_gradient() {
    let layout = MechanismLayout::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-6;
    for _ in 0..20 {
        let d = random_design(&mut rng);
        let spring = CamSpring::new(&d, &layout).unwrap();
        for j in 0..50 {
            let q = -0.5 + 3.0 * j as f64 / 49.0;
            if (q - d.q_bar).abs() < 1e-5 {
                continue;
            }
            let tau = spring.torque(q).unwrap().torque;
            let du = (spring.energy(q + h).unwrap() - spring.energy(q - h).unwrap()) / (2.0 * h);
            assert!(
                (tau + du).abs() <= 1e-6 * tau.abs().max(1.0),
                "{d:?} q={q} tau={tau} -dU/dq={}",
                -du
            );
        }
    }
}

#[test]
fn hardware_design_torque_matches_energy_gradient() {
    let d = CamDesign::hardware();
    let layout = MechanismLayout::default();
    let spring = CamSpring::new(&d, &layout).unwrap();
    let h = 1e-6;
    for q in [0.5, 0.86, 1.3, 2.0] {
        let tau = spring.torque(q).unwrap().torque;
        let du = (spring.energy(q + h).unwrap() - spring.energy(q - h).unwrap()) / (2.0 * h);
        assert!((tau + du).abs() <= 1e-6 * tau.abs().max(1.0));
        assert!(tau < 0.0);
    }
}

#[test]
fn closed_form_tangent_agrees_with_scan() {
    let layout = MechanismLayout::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..10 {
        let d = random_design(&mut rng);
        let q = -0.5 + 0.3 * i as f64;
        let g = tangent_point(&d, &layout, q).unwrap();
        let scanned = scan_tangent(&d, &layout, q, 1_000_000);
        assert!(angle_gap(g.theta_star, scanned) < 1e-6, "{d:?} q={q}");
    }
}

#[test]
fn circle_scan_agrees_with_cosine_relation() {
    let r = 0.05;
    let d = CamDesign::circular(0.0, r, 4154.0);
    let layout = MechanismLayout::default();
    let g = tangent_point(&d, &layout, 0.0).unwrap();
    let scanned = scan_tangent(&d, &layout, 0.0, 1_000_000);
    assert!(angle_gap(g.theta_star, scanned) < 1e-6);
    // The wire leaves the circle at angle acos(r/D) from the anchor direction.
    let anchor = layout.anchor();
    let angle = (g.lever_point.dot(&anchor) / (r * anchor.norm())).acos();
    assert!((angle - (r / anchor.norm()).acos()).abs() < 1e-12);
}

#[test]
fn tangency_residual_is_tiny() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..2000 {
        let d = random_design(&mut rng);
        let layout = MechanismLayout::on_thigh_axis(rand::Rng::gen_range(&mut rng, 0.15..0.5));
        let q = rand::Rng::gen_range(&mut rng, -0.5..2.6);
        let g = tangent_point(&d, &layout, q).unwrap();
        let anchor = layout.anchor();
        let t = cam_boundary_tangent(&d, q, g.theta_star);
        let scale = (anchor.norm() + d.a + d.b).powi(2);
        assert!(cross(&(anchor - g.lever_point), &t).abs() <= 1e-10 * scale);
        assert!((g.wire_dir.norm() - 1.0).abs() < 1e-14);
        assert!(g.wrapped_arc_len >= 0.0);
    }
}

#[test]
fn wire_length_matches_polyline() {
    let d = CamDesign::new(0.36, 0.081, 0.060, 0.0, 4154.0);
    let layout = MechanismLayout::default();
    for q in [0.0, 0.86, 1.7] {
        let g = tangent_point(&d, &layout, q).unwrap();
        let eq = tangent_point(&d, &layout, d.q_bar).unwrap();
        // Elongation from the polyline oracle: straight part plus the arc
        // between the two departure points, measured counter-clockwise from
        // the current one.
        let mut from = g.theta_star;
        let mut to = eq.theta_star;
        if q > d.q_bar {
            while to < from {
                to += 2.0 * PI;
            }
        } else {
            while from < to {
                from += 2.0 * PI;
            }
        }
        let arc = polyline_arc(d.a, d.b, from, to, 1_000_000);
        let expected = g.straight_len - eq.straight_len + arc;
        let dl = spring_elongation(&d, &layout, q).unwrap();
        assert!((dl - expected).abs() < 1e-7, "q={q} {dl} vs {expected}");
        let total = wire_length(&d, &layout, q).unwrap();
        assert!((total - (g.straight_len + g.wrapped_arc_len)).abs() < 1e-15);
    }
}

#[test]
fn elongation_monotone_on_joint_range() {
    let d = CamDesign::hardware();
    let curve = torque_curve(&d, &MechanismLayout::default(), -0.5, 2.6, 200).unwrap();
    assert!(curve.windows(2).all(|w| w[1].elongation > w[0].elongation));
    assert!(curve.iter().all(|s| s.valid));
}

#[test]
fn circle_moment_arm_far_anchor() {
    for r in [0.01, 0.03, 0.05] {
        let d = CamDesign::circular(0.0, r, 4154.0);
        let layout = MechanismLayout::on_thigh_axis(10.0 * r);
        let spring = CamSpring::new(&d, &layout).unwrap();
        for q in [0.2, 0.9, 1.6] {
            let s = spring.torque(q).unwrap();
            assert!(((s.torque / s.force).abs() - r).abs() <= 0.01 * r);
        }
    }
}

#[test]
fn torque_is_continuous() {
    let layout = MechanismLayout::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let d = random_design(&mut rng);
        let spring = CamSpring::new(&d, &layout).unwrap();
        for j in 0..100 {
            let q = -0.5 + 3.0 * j as f64 / 99.0;
            let t0 = spring.torque(q).unwrap().torque;
            let t1 = spring.torque(q + 1e-8).unwrap().torque;
            assert!((t1 - t0).abs() <= 1e-6, "{d:?} q={q}");
        }
    }
}
