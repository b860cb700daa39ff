use pecam_core::opt::{
    cotr_comparison, episode_seed, evaluate_design, first_principles_design, grid_sweep, load_journal, optimize,
    DesignSpace, OptimizerSettings, SweepSettings, FALL_REWARD,
};
use pecam_core::sim::{build_model, rollout};
use pecam_core::{CamDesign, MechanismLayout, ModelConfig, RunConfig, TaskKind, TaskSpec};

fn setup() -> pecam_core::RolloutSetup {
    RunConfig::default().setup().unwrap()
}

fn short_task() -> TaskSpec {
    TaskSpec {
        duration: 2.0,
        ..TaskSpec::preset(TaskKind::Forward1ms)
    }
}

#[test]
fn single_episode_record_is_that_rollout() {
    let s = setup();
    let task = short_task();
    let d = CamDesign::circular(0.2, 0.05, 4154.0);
    let rec = evaluate_design(&s, &d, &task, 1, 77).unwrap();
    let r = rollout(&s, Some(&d), &task, episode_seed(77, 0)).unwrap();
    assert_eq!(rec.avg_reward(), r.episode_reward(FALL_REWARD));
    assert_eq!(rec.objective, -r.episode_reward(FALL_REWARD));
    assert_eq!(rec.stderr, 0.0);
    assert_eq!(rec.episodes, 1);
}

#[test]
fn evaluation_is_deterministic() {
    let s = setup();
    let task = short_task();
    let d = CamDesign::hardware();
    let a = evaluate_design(&s, &d, &task, 6, 5).unwrap();
    let b = evaluate_design(&s, &d, &task, 6, 5).unwrap();
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.cotr, b.cotr);
    let c = evaluate_design(&s, &d, &task, 6, 6).unwrap();
    assert_ne!(a.objective, c.objective);
}

#[test]
fn estimate_agrees_with_larger_sample() {
    let s = setup();
    let task = TaskSpec::preset(TaskKind::Forward1ms);
    let small = evaluate_design(&s, &CamDesign::rigid(), &task, 32, 1).unwrap();
    let large = evaluate_design(&s, &CamDesign::rigid(), &task, 320, 1_000_003).unwrap();
    let gap = (small.objective - large.objective).abs();
    assert!(gap <= 2.0 * small.stderr.max(1e-12), "gap {gap} se {}", small.stderr);
}

#[test]
fn rigid_row_matches_rigid_baseline() {
    let s = setup();
    let task = short_task();
    let space = DesignSpace::circular();
    let settings = SweepSettings {
        resolution: [2, 2],
        episodes: 3,
        fall_reward: FALL_REWARD,
    };
    let cells = grid_sweep(&s, &space, &settings, &task, 9, None, |_| {}).unwrap();
    assert_eq!(cells.len(), 4);
    let rigid = evaluate_design(&s, &CamDesign::rigid(), &task, 3, 9).unwrap();
    for c in cells.iter().filter(|c| c.design[1] == 0.0) {
        assert_eq!(c.objective, rigid.objective);
        assert_eq!(c.cotr, rigid.cotr);
    }
    assert_eq!(cells.iter().filter(|c| c.design[1] == 0.0).count(), 2);
}

#[test]
fn sweep_resumes_from_journal() {
    let s = setup();
    let task = short_task();
    let space = DesignSpace::circular();
    let settings = SweepSettings {
        resolution: [2, 3],
        episodes: 2,
        fall_reward: FALL_REWARD,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.jsonl");
    let full = grid_sweep(&s, &space, &settings, &task, 4, Some((&path, "h")), |_| {}).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().take(1 + 3).collect();
    std::fs::write(&path, kept.join("\n") + "\n").unwrap();
    let mut fresh = 0;
    let resumed = grid_sweep(&s, &space, &settings, &task, 4, Some((&path, "h")), |_| fresh += 1).unwrap();
    assert_eq!(fresh, 3);
    let strip = |v: &[pecam_core::DesignEvalRecord]| {
        v.iter()
            .map(|r| (r.index, r.design, r.objective.to_bits()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&full), strip(&resumed));
    assert_eq!(load_journal(&path).unwrap().len(), 6);
}

#[test]
fn optimizer_resumes_to_identical_history() {
    let s = setup();
    let task = short_task();
    let space = DesignSpace::circular();
    let settings = OptimizerSettings {
        budget: 10,
        initial: 4,
        episodes: 2,
        fall_reward: FALL_REWARD,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("opt.jsonl");
    let full = optimize(&s, &space, &task, &settings, 3, Some((&path, "h")), |_, _| {}).unwrap();
    // Simulate a crash after six evaluations, with a torn final line.
    let text = std::fs::read_to_string(&path).unwrap();
    let mut kept: Vec<&str> = text.lines().take(1 + 6).collect();
    let torn = &text.lines().nth(7).unwrap()[..20];
    kept.push(torn);
    std::fs::write(&path, kept.join("\n")).unwrap();
    let mut fresh = 0;
    let resumed = optimize(&s, &space, &task, &settings, 3, Some((&path, "h")), |_, _| fresh += 1).unwrap();
    let key = |r: &pecam_core::DesignEvalRecord| (r.index, r.design, r.objective.to_bits());
    assert_eq!(
        full.history.iter().map(key).collect::<Vec<_>>(),
        resumed.history.iter().map(key).collect::<Vec<_>>()
    );
    assert_eq!(key(&full.best), key(&resumed.best));
    assert!(fresh >= 4);
    let best = full.history.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
    assert_eq!(full.best.objective, best);
}

#[test]
fn journal_header_mismatch_is_rejected() {
    let s = setup();
    let task = short_task();
    let space = DesignSpace::circular();
    let settings = SweepSettings {
        resolution: [1, 2],
        episodes: 1,
        fall_reward: FALL_REWARD,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.jsonl");
    grid_sweep(&s, &space, &settings, &task, 4, Some((&path, "config a")), |_| {}).unwrap();
    assert!(grid_sweep(&s, &space, &settings, &task, 4, Some((&path, "config b")), |_| {}).is_err());
}

#[test]
fn zero_gravity_needs_no_spring() {
    let model = build_model(&ModelConfig {
        gravity: 0.0,
        ..ModelConfig::default()
    })
    .unwrap();
    let c = first_principles_design(&model, &MechanismLayout::default(), 1.3, (-0.6, 1.2), 10, 0.1, 4154.0).unwrap();
    assert_eq!(c.required_torque, 0.0);
    assert!(c.points.iter().all(|p| p.r == 0.0));
    assert_eq!(c.points.len(), 10);
}

#[test]
fn heavier_robot_needs_larger_radius() {
    let model = build_model(&ModelConfig::default()).unwrap();
    let heavy = model.clone().scale_mass(2.0);
    let layout = MechanismLayout::default();
    let a = first_principles_design(&model, &layout, 1.3, (-0.6, 0.4), 6, 0.2, 4154.0).unwrap();
    let b = first_principles_design(&heavy, &layout, 1.3, (-0.6, 0.4), 6, 0.2, 4154.0).unwrap();
    assert_eq!(a.points.len(), 6);
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.q_bar, q.q_bar);
        assert!(q.r > p.r, "{p:?} {q:?}");
    }
    assert_eq!(a.optimum.q_bar, -0.6);
}

#[test]
fn balancing_spring_cancels_gravity_torque() {
    let model = build_model(&ModelConfig::default()).unwrap();
    let layout = MechanismLayout::default();
    let c = first_principles_design(&model, &layout, 1.3, (-0.6, 0.4), 3, 0.2, 4154.0).unwrap();
    for p in &c.points {
        let tau = model.springs_per_knee * pecam_core::cam::spring_torque(&CamDesign::circular(p.q_bar, p.r, 4154.0), &layout, 1.3);
        assert!((tau - c.required_torque).abs() <= 1e-6 * c.required_torque.abs());
    }
}

#[test]
fn identical_designs_show_no_reduction() {
    let s = setup();
    let task = short_task();
    let d = CamDesign::circular(0.0, 0.06, 4154.0);
    let r = cotr_comparison(&s, &d, &d, &task, 12, 2).unwrap();
    assert_eq!(r.cotr_reduction.mean, 0.0);
    assert!(r.cotr_reduction.contains(0.0));
    assert_eq!(r.knee_torque_difference.mean, 0.0);
    assert_eq!(r.paired, 12 - r.a.falls);
}
