use pecam_core::cam::torque_curve as curve;
use pecam_core::opt::{cotr_comparison, grid_sweep, optimize as run_optimizer, ComparisonReport, DesignEvalRecord};
use pecam_core::sim::{rollout_detailed, RolloutResult, SimState, TraceRow};
use pecam_core::{PlanarModel, RunConfig};
use serde::Serialize;

use crate::output::{header, journal_path, num, opt_num, show, write_output, Csv};
use crate::CliError;

pub fn torque_curve(config: &RunConfig) -> Result<(), CliError> {
    let c = &config.torque_curve;
    let samples = curve(&config.design, &config.layout, c.q_min, c.q_max, c.samples)?;
    let mut csv = Csv::new(&["q_rad", "tau_Nm", "elongation_m", "theta_star_rad", "valid"].map(String::from));
    for s in &samples {
        csv.row([num(s.q), num(s.torque), num(s.elongation), num(s.theta_star), s.valid.to_string()]);
    }
    show(&write_output(config, "torque_curve.csv", &csv.into_string())?);
    let invalid = samples.iter().filter(|s| !s.valid).count();
    if invalid == samples.len() {
        return Err(CliError::Geometry("no tangent solution anywhere on the requested range".into()));
    }
    if invalid > 0 {
        eprintln!("warning: {invalid} of {} angles have no tangent solution (valid = false)", samples.len());
    }
    Ok(())
}

fn joint_names(model: &PlanarModel) -> Vec<String> {
    model
        .actuated
        .iter()
        .map(|&j| model.bodies[j].name.replace("_thigh", "_hip").replace("_shank", "_knee"))
        .collect()
}

fn leg_names(model: &PlanarModel) -> Vec<String> {
    model
        .legs
        .iter()
        .map(|l| model.bodies[l.hip].name.trim_end_matches("_thigh").to_string())
        .collect()
}

fn trajectory_csv(model: &PlanarModel, trace: &[TraceRow]) -> String {
    let joints = joint_names(model);
    let legs = leg_names(model);
    let mut columns: Vec<String> = ["t", "x", "z", "pitch"].map(String::from).to_vec();
    for prefix in ["q", "qd", "tau"] {
        columns.extend(joints.iter().map(|j| format!("{prefix}_{j}")));
    }
    columns.extend(legs.iter().map(|l| format!("tau_spring_{l}_knee")));
    columns.extend(legs.iter().map(|l| format!("contact_{l}")));
    columns.push("reward".into());
    let mut csv = Csv::new(&columns);
    for r in trace {
        let mut cells = vec![num(r.t), num(r.q[0]), num(r.q[1]), num(r.q[2])];
        cells.extend(model.actuated.iter().map(|&j| num(r.q[j])));
        cells.extend(model.actuated.iter().map(|&j| num(r.qd[j])));
        cells.extend(r.tau.iter().map(|&v| num(v)));
        cells.extend(r.tau_spring.iter().map(|&v| num(v)));
        cells.extend(r.contact.iter().map(|&c| u8::from(c).to_string()));
        cells.push(num(r.reward.total));
        csv.row(cells);
    }
    csv.into_string()
}

#[derive(Serialize)]
struct EpisodeSummary {
    task: String,
    seed: u64,
    design: [f64; 4],
    spring_stiffness: f64,
    fell: bool,
    duration_s: f64,
    steps: usize,
    mean_reward: f64,
    distance_m: f64,
    displacement_m: f64,
    tracking_error_mps: f64,
    torque_sq_integral: f64,
    mean_abs_knee_torque_nm: f64,
    peak_knee_torque_nm: f64,
    total_mass_kg: f64,
    friction: f64,
    ik_clamps: usize,
    limit_events: usize,
    /// NaN when the traveled distance is too short for CoTr.
    cotr: f64,
    cotr_defined: bool,
}

fn to_toml<T: Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value).map_err(|e| CliError::Io(format!("cannot serialize output: {e}")))
}

pub fn simulate(config: &RunConfig) -> Result<(), CliError> {
    let mut setup = config.setup()?;
    setup.settings.record_trace = true;
    let task = config.task_spec();
    let design = (!config.design.is_rigid()).then_some(&config.design);
    match rollout_detailed(&setup, design, &task, config.seed) {
        Ok(r) => {
            show(&write_output(config, "trajectory.csv", &trajectory_csv(&setup.model, &r.trace))?);
            let summary = episode_summary(config, &r);
            show(&write_output(config, "summary.toml", &to_toml(&summary)?)?);
            println!(
                "fell={} distance={:.3} m tracking_error={:.4} m/s cotr={}",
                r.fell,
                r.distance,
                r.tracking_error,
                opt_num(r.cotr)
            );
            Ok(())
        }
        Err(f) => {
            show(&write_output(config, "trajectory.csv", &trajectory_csv(&setup.model, &f.trace))?);
            if let Some(state) = &f.last_good {
                show(&write_output(config, "last_good_state.json", &state_json(state)?)?);
            }
            Err(f.error.into())
        }
    }
}

fn state_json(state: &SimState) -> Result<String, CliError> {
    serde_json::to_string_pretty(state)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(format!("cannot serialize state: {e}")))
}

fn episode_summary(config: &RunConfig, r: &RolloutResult) -> EpisodeSummary {
    EpisodeSummary {
        task: config.task.kind.name().to_string(),
        seed: config.seed,
        design: config.design.vector(),
        spring_stiffness: config.design.k_s,
        fell: r.fell,
        duration_s: r.duration,
        steps: r.steps,
        mean_reward: r.mean_reward,
        distance_m: r.distance,
        displacement_m: r.displacement,
        tracking_error_mps: r.tracking_error,
        torque_sq_integral: r.torque_sq_integral,
        mean_abs_knee_torque_nm: r.mean_abs_knee_torque,
        peak_knee_torque_nm: r.peak_knee_torque,
        total_mass_kg: r.total_mass,
        friction: r.friction,
        ik_clamps: r.ik_clamps,
        limit_events: r.limit_events,
        cotr: r.cotr.unwrap_or(f64::NAN),
        cotr_defined: r.cotr.is_some(),
    }
}

fn describe(r: &DesignEvalRecord) -> String {
    let d = r.design;
    format!(
        "[{:.4}, {:.4}, {:.4}, {:.4}] f={:.5} ± {:.5} falls={}",
        d[0], d[1], d[2], d[3], r.objective, r.stderr, r.falls
    )
}

pub fn sweep(config: &RunConfig) -> Result<(), CliError> {
    let setup = config.setup()?;
    let task = config.task_spec();
    let journal = journal_path(config, "sweep.jsonl")?;
    let head = header(config);
    let total = config.sweep.resolution[0] * config.sweep.resolution[1];
    let cells = grid_sweep(
        &setup,
        &config.design_space,
        &config.sweep,
        &task,
        config.seed,
        Some((&journal, &head)),
        |r| eprintln!("cell {}/{total} {}", r.index + 1, describe(r)),
    )?;
    let mut csv = Csv::new(&["q_bar_rad", "r_m", "avg_reward", "cotr", "episodes"].map(String::from));
    for c in &cells {
        csv.row([num(c.design[0]), num(c.design[1]), num(c.avg_reward()), opt_num(c.cotr), c.episodes.to_string()]);
    }
    show(&journal);
    show(&write_output(config, "contour.csv", &csv.into_string())?);
    Ok(())
}

#[derive(Serialize)]
struct BestDesign {
    index: usize,
    evaluations: usize,
    q_bar: f64,
    a: f64,
    b: f64,
    phi0: f64,
    spring_stiffness: f64,
    objective: f64,
    stderr: f64,
    avg_reward: f64,
    episodes: usize,
    falls: usize,
    /// NaN when no episode had a defined CoTr.
    cotr: f64,
}

pub fn optimize(config: &RunConfig) -> Result<(), CliError> {
    let setup = config.setup()?;
    let task = config.task_spec();
    let journal = journal_path(config, "optimize.jsonl")?;
    let head = header(config);
    let result = run_optimizer(
        &setup,
        &config.design_space,
        &task,
        &config.optimizer,
        config.seed,
        Some((&journal, &head)),
        |r, best| println!("eval {:>3} {} | best #{} f={:.5}", r.index, describe(r), best.index, best.objective),
    )?;
    let b = &result.best;
    let best = BestDesign {
        index: b.index,
        evaluations: result.history.len(),
        q_bar: b.design[0],
        a: b.design[1],
        b: b.design[2],
        phi0: b.design[3],
        spring_stiffness: b.spring_stiffness,
        objective: b.objective,
        stderr: b.stderr,
        avg_reward: b.avg_reward(),
        episodes: b.episodes,
        falls: b.falls,
        cotr: b.cotr.unwrap_or(f64::NAN),
    };
    let mut csv = Csv::new(
        &["index", "q_bar", "a", "b", "phi0", "objective", "stderr", "falls", "cotr"].map(String::from),
    );
    for r in &result.history {
        let mut cells = vec![r.index.to_string()];
        cells.extend(r.design.iter().map(|&v| num(v)));
        cells.extend([num(r.objective), num(r.stderr), r.falls.to_string(), opt_num(r.cotr)]);
        csv.row(cells);
    }
    show(&journal);
    show(&write_output(config, "history.csv", &csv.into_string())?);
    show(&write_output(config, "best_design.toml", &to_toml(&best)?)?);
    println!("best {}", describe(b));
    Ok(())
}

pub fn compare(config: &RunConfig) -> Result<(), CliError> {
    let setup = config.setup()?;
    let task = config.task_spec();
    let c = &config.compare;
    let report: ComparisonReport =
        cotr_comparison(&setup, &c.design_a, &c.design_b, &task, c.episodes, config.seed)?;
    show(&write_output(config, "compare.toml", &to_toml(&report)?)?);
    let i = &report.cotr_reduction;
    println!(
        "paired {}/{} episodes, CoTr A {:.4} B {:.4}, reduction {:.4} [{:.4}, {:.4}]",
        report.paired, report.episodes, report.a.cotr.mean, report.b.cotr.mean, i.mean, i.lo, i.hi
    );
    Ok(())
}
