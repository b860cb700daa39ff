//! Monte-Carlo estimate of the design objective.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cam::CamDesign;
use crate::error::OptError;
use crate::sim::{rollout, RolloutSetup};
use crate::task::TaskSpec;

pub const JOURNAL_SCHEMA_VERSION: u32 = 1;

/// Episode value used for falls and failed simulations.
pub const FALL_REWARD: f64 = -10.0;

/// Seed of episode `index` in a batch started from `base`.
pub fn episode_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-episode quantities kept for paired statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOutcome {
    pub seed: u64,
    /// Mean reward, or the fall reward.
    pub reward: f64,
    pub fell: bool,
    pub cotr: Option<f64>,
    pub tracking_error: f64,
    pub mean_abs_knee_torque: f64,
    pub distance: f64,
}

/// Runs `n` independently seeded episodes; results are in episode order.
///
/// Simulation failures are scored as falls.
pub fn run_episodes(
    setup: &RolloutSetup,
    design: Option<&CamDesign>,
    task: &TaskSpec,
    n: usize,
    base_seed: u64,
    fall_reward: f64,
) -> Vec<EpisodeOutcome> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = episode_seed(base_seed, i);
            match rollout(setup, design, task, seed) {
                Ok(r) => EpisodeOutcome {
                    seed,
                    reward: r.episode_reward(fall_reward),
                    fell: r.fell,
                    cotr: if r.fell { None } else { r.cotr },
                    tracking_error: r.tracking_error,
                    mean_abs_knee_torque: r.mean_abs_knee_torque,
                    distance: r.distance,
                },
                Err(_) => EpisodeOutcome {
                    seed,
                    reward: fall_reward,
                    fell: true,
                    cotr: None,
                    tracking_error: f64::NAN,
                    mean_abs_knee_torque: f64::NAN,
                    distance: 0.0,
                },
            }
        })
        .collect()
}

/// One evaluation of the objective `f = -(mean episode reward)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignEvalRecord {
    pub schema_version: u32,
    /// Position in the run (grid cell or optimizer iteration).
    pub index: usize,
    /// `[q_bar, a, b, phi0]`.
    pub design: [f64; 4],
    pub spring_stiffness: f64,
    pub objective: f64,
    pub stderr: f64,
    pub episodes: usize,
    pub seed: u64,
    pub falls: usize,
    /// Mean CoTr over episodes where it is defined.
    pub cotr: Option<f64>,
    pub tracking_error: Option<f64>,
    pub mean_abs_knee_torque: Option<f64>,
    pub wall_time_s: f64,
}

impl DesignEvalRecord {
    pub fn cam(&self) -> CamDesign {
        let [q_bar, a, b, phi0] = self.design;
        CamDesign::new(q_bar, a, b, phi0, self.spring_stiffness)
    }

    pub fn avg_reward(&self) -> f64 {
        -self.objective
    }
}

pub(crate) fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates episode outcomes into a record; the reduction runs in episode order.
pub fn summarize(design: &CamDesign, outcomes: &[EpisodeOutcome], seed: u64, index: usize) -> DesignEvalRecord {
    let n = outcomes.len();
    let f: Vec<f64> = outcomes.iter().map(|o| -o.reward).collect();
    let objective = mean(f.iter().copied()).unwrap_or(f64::NAN);
    let stderr = if n > 1 {
        let var = f.iter().map(|v| (v - objective).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let ok = || outcomes.iter().filter(|o| !o.fell);
    DesignEvalRecord {
        schema_version: JOURNAL_SCHEMA_VERSION,
        index,
        design: design.vector(),
        spring_stiffness: design.k_s,
        objective,
        stderr,
        episodes: n,
        seed,
        falls: outcomes.iter().filter(|o| o.fell).count(),
        cotr: mean(outcomes.iter().filter_map(|o| o.cotr)),
        tracking_error: mean(ok().map(|o| o.tracking_error)),
        mean_abs_knee_torque: mean(ok().map(|o| o.mean_abs_knee_torque)),
        wall_time_s: 0.0,
    }
}

/// Estimates the objective of `design` over `n` episodes seeded from `base_seed`.
pub fn evaluate_design(
    setup: &RolloutSetup,
    design: &CamDesign,
    task: &TaskSpec,
    n: usize,
    base_seed: u64,
) -> Result<DesignEvalRecord, OptError> {
    evaluate_indexed(setup, design, task, n, base_seed, FALL_REWARD, 0)
}

pub(crate) fn evaluate_indexed(
    setup: &RolloutSetup,
    design: &CamDesign,
    task: &TaskSpec,
    n: usize,
    base_seed: u64,
    fall_reward: f64,
    index: usize,
) -> Result<DesignEvalRecord, OptError> {
    if n == 0 {
        return Err(crate::error::ConfigError::invalid("episodes", "must be at least 1").into());
    }
    design.validate()?;
    let start = Instant::now();
    let outcomes = run_episodes(setup, Some(design), task, n, base_seed, fall_reward);
    let mut record = summarize(design, &outcomes, base_seed, index);
    record.wall_time_s = start.elapsed().as_secs_f64();
    Ok(record)
}
