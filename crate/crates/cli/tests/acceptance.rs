//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use pecam_core::cam::{
    cam_boundary, cam_boundary_tangent, tangent_point, torque_curve, CamSpring, MechanismLayout, Vec2,
};
use pecam_core::opt::first_principles::first_principles_design;
use pecam_core::opt::{
    bootstrap_mean, cotr_comparison, gp_fit, grid_sweep, minimize, optimize, run_episodes, DesignEvalRecord,
    DesignSpace, Interval, OptimizerSettings, Surrogate, SweepSettings, DEFAULT_Q_REF, FALL_REWARD,
};
use pecam_core::sim::dynamics::{kinetic_energy, mass_matrix, potential_energy};
use pecam_core::sim::{rollout, step, KneeSprings, ModelConfig, PlanarModel, SimState, StepInput, Terrain};
use pecam_core::{CamDesign, RolloutSetup, RunConfig, TaskKind, TaskSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const SWEEP_SEED: u64 = 0;
const SWEEP_RESOLUTION: usize = 20;
const SWEEP_EPISODES: usize = 32;
const COMPARE_EPISODES: usize = 64;
const BRANIN_MIN: f64 = 0.397_887_357_729_738;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn setup() -> RolloutSetup {
    RunConfig::default().setup().expect("default config")
}

fn forward_task() -> TaskSpec {
    TaskSpec::preset(TaskKind::Forward1ms)
}

fn random_design<R: Rng>(rng: &mut R) -> CamDesign {
    CamDesign::new(
        rng.gen_range(-0.6..1.2),
        rng.gen_range(0.01..0.1),
        rng.gen_range(0.01..0.1),
        rng.gen_range(-PI..PI),
        4154.0,
    )
}

fn cross(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

fn angle_gap(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn show_interval(i: &Interval) -> String {
    format!("{:.4} [{:.4}, {:.4}]", i.mean, i.lo, i.hi)
}

// Shared expensive studies.

fn sweep() -> &'static Vec<DesignEvalRecord> {
    static SWEEP: OnceLock<Vec<DesignEvalRecord>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let settings = SweepSettings {
            resolution: [SWEEP_RESOLUTION, SWEEP_RESOLUTION],
            episodes: SWEEP_EPISODES,
            ..SweepSettings::default()
        };
        grid_sweep(&setup(), &DesignSpace::circular(), &settings, &forward_task(), SWEEP_SEED, None, |_| {})
            .expect("sweep runs")
    })
}

/// GP posterior mean of the sweep objective over the circular space.
fn sweep_surface() -> &'static Surrogate {
    static SURFACE: OnceLock<Surrogate> = OnceLock::new();
    SURFACE.get_or_init(|| {
        let space = DesignSpace::circular();
        let x: Vec<Vec<f64>> = sweep().iter().map(|r| vec![r.design[0], r.design[1]]).collect();
        let y: Vec<f64> = sweep().iter().map(|r| r.objective).collect();
        gp_fit(&x, &y, &space.lower, &space.upper).expect("sweep surface fit")
    })
}

fn desk_runs(space: &'static str) -> &'static Vec<DesignEvalRecord> {
    static CIRCULAR: OnceLock<Vec<DesignEvalRecord>> = OnceLock::new();
    static ELLIPTIC: OnceLock<Vec<DesignEvalRecord>> = OnceLock::new();
    let (cell, design_space) = match space {
        "circular" => (&CIRCULAR, DesignSpace::circular()),
        _ => (&ELLIPTIC, DesignSpace::elliptic()),
    };
    cell.get_or_init(|| {
        let setup = setup();
        let settings = OptimizerSettings::default();
        SEEDS
            .iter()
            .map(|&s| {
                optimize(&setup, &design_space, &forward_task(), &settings, s, None, |_, _| {})
                    .expect("optimizer runs")
                    .best
            })
            .collect()
    })
}

fn optimized_design() -> CamDesign {
    desk_runs("circular")[0].cam()
}

// Criteria.

fn c1_energy_consistency() -> Verdict {
    let start = Instant::now();
    let layout = MechanismLayout::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-6;
    let (mut worst, mut checked, mut skipped) = (0.0f64, 0usize, 0usize);
    for _ in 0..100 {
        let d = random_design(&mut rng);
        let spring = CamSpring::new(&d, &layout).expect("valid design");
        for q in linspace(-0.5, 2.6, 200) {
            if (q - d.q_bar).abs() < 10.0 * h {
                skipped += 1;
                continue;
            }
            let tau = spring.torque(q).expect("tangent").torque;
            let du = (spring.energy(q + h).unwrap() - spring.energy(q - h).unwrap()) / (2.0 * h);
            worst = worst.max((tau + du).abs() / tau.abs().max(1.0));
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-6 && secs < 60.0,
        format!(
            "max |tau + dU/dq| / max(1,|tau|) = {worst:.2e} over {checked} samples \
             ({skipped} within 1e-5 rad of the slack kink skipped), {secs:.1} s"
        ),
    )
}

/// Tangent parameter from a dense scan of the tangency residual on the
/// counter-clockwise wrapping side, refined by bisection.
fn scan_tangent(design: &CamDesign, layout: &MechanismLayout, q: f64, n: usize) -> f64 {
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

fn c2_tangency_and_branch() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_residual, mut wrap_violations, mut lever_side_violations, mut taut) = (0.0f64, 0, 0, 0);
    for _ in 0..10_000 {
        let d = random_design(&mut rng);
        let layout = MechanismLayout::on_thigh_axis(rng.gen_range(0.15..0.5));
        let q = rng.gen_range(-0.5..2.6);
        let g = tangent_point(&d, &layout, q).expect("anchor outside cam");
        let anchor = layout.anchor();
        let t = cam_boundary_tangent(&d, q, g.theta_star);
        let scale = (anchor.norm() + d.a + d.b).powi(2);
        worst_residual = worst_residual.max(cross(&(anchor - g.lever_point), &t).abs() / scale);
        let ccw = (g.lever_point - anchor).dot(&t) > 0.0;
        if !ccw || g.wrapped_arc_len < 0.0 || (g.wire_dir.norm() - 1.0).abs() > 1e-12 {
            wrap_violations += 1;
        }
        let spring = CamSpring::new(&d, &layout).expect("valid design");
        if spring.elongation(q).unwrap() > 0.0 {
            taut += 1;
            if (anchor - g.lever_point).dot(&g.lever_point) < 0.0 {
                lever_side_violations += 1;
            }
        }
    }
    let layout = MechanismLayout::default();
    let mut worst_scan = 0.0f64;
    for _ in 0..100 {
        let d = random_design(&mut rng);
        let q = rng.gen_range(-0.5..2.6);
        let g = tangent_point(&d, &layout, q).unwrap();
        worst_scan = worst_scan.max(angle_gap(g.theta_star, scan_tangent(&d, &layout, q, 200_000)));
    }
    let pass = worst_residual <= 1e-10 && worst_scan <= 1e-6 && wrap_violations == 0 && lever_side_violations == 0;
    verdict(
        pass,
        format!(
            "scaled tangency residual max {worst_residual:.2e}; scan vs closed form max {worst_scan:.2e} rad; \
             counter-clockwise wrap branch violated on {wrap_violations}/10000; \
             lever-side inequality <F_s, l_r> >= 0 violated on {lever_side_violations}/{taut} taut samples"
        ),
    )
}

fn c3_rigid_equivalence() -> Verdict {
    let layout = MechanismLayout::default();
    let curve = torque_curve(&CamDesign::rigid(), &layout, -0.5, 2.7, 321).unwrap();
    let zero = curve.iter().all(|s| s.valid && s.torque == 0.0);
    let mut setup = setup();
    setup.settings.record_trace = true;
    let mut identical = 0;
    let mut total = 0;
    for kind in [TaskKind::Forward1ms, TaskKind::RandomCommands, TaskKind::Stand, TaskKind::Rough] {
        let task = TaskSpec {
            duration: 2.0,
            ..TaskSpec::preset(kind)
        };
        for seed in 0..3 {
            let a = rollout(&setup, Some(&CamDesign::rigid()), &task, seed).unwrap();
            let b = rollout(&setup, None, &task, seed).unwrap();
            total += 1;
            if format!("{a:?}") == format!("{b:?}") {
                identical += 1;
            }
        }
    }
    verdict(
        zero && identical == total,
        format!("rigid torque curve all zero: {zero}; bit-identical rollouts {identical}/{total} with traces"),
    )
}

/// Peak relative energy drift and peak stored spring energy over a 5 s swing at dt 1e-4.
fn swing_drift(design: Option<CamDesign>) -> (f64, f64) {
    let config = ModelConfig::default();
    let model = PlanarModel::fixed_leg(&config);
    let layout = MechanismLayout::default();
    let springs = design.map(|d| KneeSprings::uniform(&d, &layout, 1).unwrap());
    let spring = |s: &SimState| springs.as_ref().map_or(0.0, |k| model.springs_per_knee * k.energy(0, s.q[1]));
    let energy = |s: &SimState| kinetic_energy(&model, &s.q, &s.qd) + potential_energy(&model, &s.q) + spring(s);
    let mut state = SimState::new(&model, vec![0.5, 0.2], vec![0.0, 0.0]);
    let rest = potential_energy(&model, &[0.0, 0.0]);
    let e0 = energy(&state);
    let terrain = Terrain::Flat;
    let input = StepInput {
        torques: &[0.0, 0.0],
        springs: springs.as_ref(),
        contact: None,
        terrain: &terrain,
        base_wrench: [0.0; 3],
        dt: 1e-4,
    };
    let (mut drift, mut stored): (f64, f64) = (0.0, 0.0);
    for _ in 0..50_000 {
        step(&model, &mut state, &input).unwrap();
        drift = drift.max((energy(&state) - e0).abs());
        stored = stored.max(spring(&state));
    }
    (drift / (e0 - rest), stored)
}

fn c4_physics() -> Verdict {
    let (rigid, _) = swing_drift(None);
    let (sprung, stored) = swing_drift(Some(CamDesign::hardware()));
    let model = pecam_core::sim::build_model(&ModelConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut spd = 0;
    for _ in 0..1000 {
        let mut q: Vec<f64> = (0..model.dof()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        q[1] = rng.gen_range(0.2..1.0);
        let m = mass_matrix(&model, &q);
        let symmetric = (&m - m.transpose()).amax() <= 1e-12 * m.amax();
        if symmetric && m.cholesky().is_some() {
            spd += 1;
        }
    }
    verdict(
        rigid <= 1e-3 && sprung <= 1e-3 && stored > 1e-3 && spd == 1000,
        format!(
            "relative drift rigid {rigid:.2e}, with spring {sprung:.2e} (peak spring energy {stored:.3} J); \
             SPD mass matrix {spd}/1000"
        ),
    )
}

fn grid_index(r: &DesignEvalRecord) -> (usize, usize) {
    (r.index / SWEEP_RESOLUTION, r.index % SWEEP_RESOLUTION)
}

fn cotr_interval(design: Option<&CamDesign>) -> Interval {
    let outcomes = run_episodes(&setup(), design, &forward_task(), SWEEP_EPISODES, SWEEP_SEED, FALL_REWARD);
    let cotr: Vec<f64> = outcomes.iter().filter_map(|o| o.cotr).collect();
    bootstrap_mean(&cotr, 4000, 5)
}

fn c5_contour() -> Verdict {
    let start = Instant::now();
    let cells = sweep();
    let best = &cells[pecam_core::opt::best_index(cells).unwrap()];
    let (iq, ir) = grid_index(best);
    let last = SWEEP_RESOLUTION - 1;
    let interior = iq > 0 && iq < last && ir > 0 && ir < last;
    let positive_r = best.design[1] > 0.0;
    let rigid = cotr_interval(None);
    let optimum = cotr_interval(Some(&best.cam()));
    let separated = optimum.hi < rigid.lo;
    let space = DesignSpace::circular();
    let surface = sweep_surface();
    let (mut smooth_best, mut at) = (f64::INFINITY, [0.0, 0.0]);
    for q in linspace(space.lower[0], space.upper[0], 181) {
        for r in linspace(space.lower[1], space.upper[1], 101) {
            let m = surface.predict(&[q, r]).0;
            if m < smooth_best {
                smooth_best = m;
                at = [q, r];
            }
        }
    }
    verdict(
        interior && positive_r && separated,
        format!(
            "{n}x{n}x{e} sweep in {secs:.0} s; best cell q_bar {q:.3} r {r:.4} (grid index {iq},{ir}; interior {interior}) \
             avg reward {rew:.4} +- {se:.4}; smoothed-surface optimum q_bar {sq:.3} r {sr:.4}; \
             CoTr optimum {co} vs r=0 {cr}, reduction {red:.1}% (reference full-scale figure 33%)",
            n = SWEEP_RESOLUTION,
            e = SWEEP_EPISODES,
            secs = start.elapsed().as_secs_f64(),
            q = best.design[0],
            r = best.design[1],
            rew = best.avg_reward(),
            se = best.stderr,
            sq = at[0],
            sr = at[1],
            co = show_interval(&optimum),
            cr = show_interval(&rigid),
            red = 100.0 * (1.0 - optimum.mean / rigid.mean),
        ),
    )
}

fn branin(x: &[f64]) -> f64 {
    let (a, b, c) = (1.0, 5.1 / (4.0 * PI * PI), 5.0 / PI);
    let (r, s, t) = (6.0, 10.0, 1.0 / (8.0 * PI));
    a * (x[1] - b * x[0] * x[0] + c * x[0] - r).powi(2) + s * (1.0 - t) * x[0].cos() + s
}

fn c6_optimizer() -> Verdict {
    let mut detail = String::new();
    let space = DesignSpace {
        lower: vec![-5.0, 0.0],
        upper: vec![10.0, 15.0],
        ..DesignSpace::circular()
    };
    let mut branin_ok = 0;
    for &seed in &SEEDS {
        let history = minimize(&space, 100, 8, seed, |_, x| Ok::<f64, ()>(branin(x))).unwrap();
        let reached = history.iter().position(|h| h.1 - BRANIN_MIN <= 0.05);
        if reached.is_some() {
            branin_ok += 1;
        }
        let _ = write!(detail, "branin seed {seed}: within 0.05 after {reached:?} evals; ");
    }
    let surface = sweep_surface();
    let mut smoothed: Vec<f64> = sweep().iter().map(|r| surface.predict(&[r.design[0], r.design[1]]).0).collect();
    smoothed.sort_by(f64::total_cmp);
    let threshold = smoothed[(smoothed.len() as f64 * 0.05).ceil() as usize - 1];
    let mut raw: Vec<f64> = sweep().iter().map(|r| r.objective).collect();
    raw.sort_by(f64::total_cmp);
    let raw_threshold = raw[(raw.len() as f64 * 0.05).ceil() as usize - 1];
    let mut desk_ok = 0;
    for (seed, best) in SEEDS.iter().zip(desk_runs("circular")) {
        let value = surface.predict(&[best.design[0], best.design[1]]).0;
        if value <= threshold {
            desk_ok += 1;
        }
        let _ = write!(
            detail,
            "desk seed {seed}: best q_bar {:.3} r {:.4} f {:.4}, sweep surface {value:.4}; ",
            best.design[0], best.design[1], best.objective
        );
    }
    let _ = write!(
        detail,
        "top-5% threshold: sweep surface {threshold:.4} (raw cells {raw_threshold:.4}); \
         branin {branin_ok}/5, desk {desk_ok}/5"
    );
    verdict(branin_ok == 5 && desk_ok >= 4, detail)
}

fn c7_repeatability() -> Verdict {
    let runs = desk_runs("elliptic");
    let f: Vec<f64> = runs.iter().map(|r| r.objective).collect();
    let (m, s) = mean_std(&f);
    let mut detail = format!("best f per seed {f:.4?}; mean {m:.4} std {s:.4} ({:.2}% of mean); spreads", 100.0 * s / m.abs());
    for (k, name) in ["q_bar", "a", "b", "phi0"].iter().enumerate() {
        let v: Vec<f64> = runs.iter().map(|r| r.design[k]).collect();
        let (pm, ps) = mean_std(&v);
        let _ = write!(detail, " {name} {pm:.4} +- {ps:.4}");
    }
    verdict(s <= 0.05 * m.abs(), detail)
}

fn c8_first_principles() -> Verdict {
    let config = RunConfig::default();
    let setup = setup();
    let space = DesignSpace::circular();
    let range = (space.lower[0], space.upper[0]);
    let curve = first_principles_design(
        &setup.model,
        &config.layout,
        DEFAULT_Q_REF,
        range,
        19,
        space.upper[1],
        space.spring_stiffness,
    );
    let zero_g = first_principles_design(
        &setup.model.clone().with_gravity(0.0),
        &config.layout,
        DEFAULT_Q_REF,
        range,
        19,
        space.upper[1],
        space.spring_stiffness,
    );
    let Ok(curve) = curve else {
        return verdict(false, format!("no balancing curve: {:?}", curve.err()));
    };
    let collapses = zero_g.map(|c| c.points.iter().all(|p| p.r == 0.0)).unwrap_or(false);
    let fp = CamDesign::circular(curve.optimum.q_bar, curve.optimum.r, space.spring_stiffness);
    let task = forward_task();
    let rigid = CamDesign::rigid();
    let fp_report = cotr_comparison(&setup, &rigid, &fp, &task, COMPARE_EPISODES, 0).unwrap();
    let opt = optimized_design();
    let opt_report = cotr_comparison(&setup, &rigid, &opt, &task, COMPARE_EPISODES, 0).unwrap();
    let smaller = fp_report.cotr_reduction.mean < opt_report.cotr_reduction.mean;
    verdict(
        !curve.points.is_empty() && collapses && smaller,
        format!(
            "required knee torque {:.2} N*m; balancing points {} on q_bar [{:.2}, {:.2}]; zero gravity gives r = 0: {collapses}; \
             first-principles design q_bar {:.3} r {:.4}: CoTr reduction {}; optimized q_bar {:.3} r {:.4}: {} \
             (reference full-scale figures 8% vs 33%)",
            curve.required_torque,
            curve.points.len(),
            curve.points.first().map_or(f64::NAN, |p| p.q_bar),
            curve.points.last().map_or(f64::NAN, |p| p.q_bar),
            fp.q_bar,
            fp.a,
            show_interval(&fp_report.cotr_reduction),
            opt.q_bar,
            opt.a,
            show_interval(&opt_report.cotr_reduction),
        ),
    )
}

fn c9_torque_shift() -> Verdict {
    let setup = setup();
    let task = TaskSpec::preset(TaskKind::RandomCommands);
    let opt = optimized_design();
    let report = cotr_comparison(&setup, &CamDesign::rigid(), &opt, &task, COMPARE_EPISODES, 0).unwrap();
    let diff = &report.knee_torque_difference;
    let tracking = &report.tracking_difference;
    let pass = diff.lo > 0.0 && tracking.mean.abs() <= 0.05;
    verdict(
        pass,
        format!(
            "random commands, {} paired of {} episodes; mean |knee torque| rigid {} optimized {}; \
             rigid - optimized {}; tracking rigid {} optimized {}, difference {} \
             (reference full-scale figures 26 vs 7 N*m)",
            report.paired,
            report.episodes,
            show_interval(&report.a.mean_abs_knee_torque),
            show_interval(&report.b.mean_abs_knee_torque),
            show_interval(diff),
            show_interval(&report.a.tracking_error),
            show_interval(&report.b.tracking_error),
            show_interval(tracking),
        ),
    )
}

fn c10_tracking() -> Verdict {
    let setup = setup();
    let opt = optimized_design();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for speed in [0.5, 0.75, 1.0] {
        let task = TaskSpec {
            forward_speed: speed,
            roughness: 0.0,
            ..forward_task()
        };
        for (name, design) in [("rigid", None), ("optimized", Some(&opt))] {
            let outcomes = run_episodes(&setup, design, &task, 16, 10, FALL_REWARD);
            let falls = outcomes.iter().filter(|o| o.fell).count();
            let e = outcomes.iter().map(|o| o.tracking_error).sum::<f64>() / outcomes.len() as f64;
            worst = worst.max(if falls > 0 { f64::INFINITY } else { e });
            let _ = write!(detail, "{name} {speed} m/s: {e:.3} m/s ({falls} falls); ");
        }
    }
    let _ = write!(detail, "worst {worst:.3} m/s");
    verdict(worst < 0.25, detail)
}

fn pecam(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pecam")).args(args).output().expect("binary runs")
}

fn records(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn header_lines(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

fn indices(lines: &[String]) -> Vec<u64> {
    lines
        .iter()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["index"].as_u64().unwrap())
        .collect()
}

fn c11_determinism_and_journaling() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let root = dir.path();
    let cfg = root.join("run.toml");
    fs::write(
        &cfg,
        "schema_version = 1\nseed = 5\n[task]\nkind = \"forward_1ms\"\nduration = 0.5\n\
         [sweep]\nresolution = [3, 3]\nepisodes = 2\n[optimizer]\nbudget = 10\ninitial = 4\nepisodes = 2\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = |name: &str| root.join(name).to_str().unwrap().to_string();
    let mut failures = Vec::new();
    let mut ok = |cond: bool, what: &str| {
        if !cond {
            failures.push(what.to_string());
        }
    };

    for cmd in [
        vec!["torque-curve", "--design", "hardware"],
        vec!["simulate", "--duration", "2", "--design", "hardware"],
        vec!["sweep"],
        vec!["optimize"],
        vec!["compare", "--episodes", "4"],
    ] {
        let name = cmd[0];
        let (a, b) = (out(&format!("{name}_a")), out(&format!("{name}_b")));
        let mut args_a = vec!["--config", cfg, "--out", &a, "--workers", "1"];
        args_a.extend(&cmd);
        let mut args_b = vec!["--config", cfg, "--out", &b, "--workers", "2"];
        args_b.extend(&cmd);
        ok(pecam(&args_a).status.success() && pecam(&args_b).status.success(), &format!("{name} runs"));
        for entry in fs::read_dir(&a).unwrap() {
            let file = entry.unwrap().file_name();
            let file = file.to_str().unwrap();
            if file.ends_with(".jsonl") {
                continue;
            }
            let same = fs::read(Path::new(&a).join(file)).unwrap() == fs::read(Path::new(&b).join(file)).unwrap();
            ok(same, &format!("{name}/{file} byte-identical"));
        }
    }

    for (name, journal, product) in [("sweep", "sweep.jsonl", "contour.csv"), ("optimize", "optimize.jsonl", "history.csv")] {
        let dir = out(&format!("{name}_a"));
        let path = Path::new(&dir).join(journal);
        let full = records(&path);
        let keep = full.len() / 2;
        let torn = format!("{}{}\n{}", header_lines(&path), full[..keep].join("\n"), &full[keep][..full[keep].len() / 2]);
        fs::write(&path, torn).unwrap();
        let before = fs::read(Path::new(&dir).join(product)).unwrap();
        ok(pecam(&["--config", cfg, "--out", &dir, name]).status.success(), &format!("{name} resumes"));
        let resumed = records(&path);
        let idx = indices(&resumed);
        let mut unique = idx.clone();
        unique.sort_unstable();
        unique.dedup();
        ok(unique.len() == idx.len() && idx.len() == full.len(), &format!("{name} journal has no duplicates"));
        ok(resumed[..keep] == full[..keep], &format!("{name} kept records replayed, not re-run"));
        ok(fs::read(Path::new(&dir).join(product)).unwrap() == before, &format!("{name} output unchanged after resume"));
        let again = records(&path);
        ok(pecam(&["--config", cfg, "--out", &dir, name]).status.success(), &format!("{name} completed rerun"));
        ok(records(&path) == again, &format!("{name} completed rerun adds no evaluations"));
    }
    let pass = failures.is_empty();
    verdict(
        pass,
        if pass {
            "five commands byte-identical across reruns and worker counts; torn sweep and optimize journals resumed without duplicates".into()
        } else {
            format!("failed checks: {}", failures.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("energy consistency", c1_energy_consistency),
        ("tangency and branch", c2_tangency_and_branch),
        ("rigid baseline equivalence", c3_rigid_equivalence),
        ("simulator physics", c4_physics),
        ("desk contour study", c5_contour),
        ("optimizer competence", c6_optimizer),
        ("repeatability", c7_repeatability),
        ("first-principles construction", c8_first_principles),
        ("torque-distribution shift", c9_torque_shift),
        ("tracking preservation", c10_tracking),
        ("determinism and journaling", c11_determinism_and_journaling),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {status} {name} ({:.0} s): {}", start.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria PASS");
    } else {
        println!("acceptance: FAIL on criteria {failed:?}");
        std::process::exit(1);
    }
}
