//! Exhaustive grid over circular cams.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, OptError};
use crate::opt::evaluate::{evaluate_indexed, DesignEvalRecord, FALL_REWARD};
use crate::opt::journal::Journal;
use crate::opt::space::{DesignSpace, Parameterization};
use crate::sim::RolloutSetup;
use crate::task::TaskSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    /// Grid points along `q_bar` and `r`.
    pub resolution: [usize; 2],
    pub episodes: usize,
    pub fall_reward: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            resolution: [40, 40],
            episodes: 32,
            fall_reward: FALL_REWARD,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Grid points `(q_bar, r)`, `q_bar` varying slowest.
pub fn sweep_points(space: &DesignSpace, resolution: [usize; 2]) -> Vec<[f64; 2]> {
    let qs = linspace(space.lower[0], space.upper[0], resolution[0]);
    let rs = linspace(space.lower[1], space.upper[1], resolution[1]);
    qs.iter().flat_map(|&q| rs.iter().map(move |&r| [q, r])).collect()
}

/// Evaluates every grid cell with episode seed `seed`.
///
/// Cells already present in the journal are reused.
pub fn grid_sweep(
    setup: &RolloutSetup,
    space: &DesignSpace,
    settings: &SweepSettings,
    task: &TaskSpec,
    seed: u64,
    journal: Option<(&Path, &str)>,
    mut progress: impl FnMut(&DesignEvalRecord),
) -> Result<Vec<DesignEvalRecord>, OptError> {
    if space.parameterization != Parameterization::Circular {
        return Err(ConfigError::invalid("design_space.parameterization", "sweeps need a circular space").into());
    }
    if settings.resolution.contains(&0) || settings.episodes == 0 {
        return Err(ConfigError::invalid("sweep.resolution", "resolution and episodes must be positive").into());
    }
    space.validate()?;
    task.validate()?;
    let (mut journal, prior) = match journal {
        Some((path, header)) => {
            let (j, r) = Journal::open(path, header)?;
            (Some(j), r)
        }
        None => (None, Vec::new()),
    };
    let points = sweep_points(space, settings.resolution);
    let mut done: Vec<Option<DesignEvalRecord>> = vec![None; points.len()];
    for r in prior {
        let slot = done
            .get_mut(r.index)
            .ok_or_else(|| OptError::Journal(format!("journal cell {} is outside the grid", r.index)))?;
        if r.design != space.design(&points[r.index]).vector() {
            return Err(OptError::Journal(format!("journal cell {} does not match the grid", r.index)));
        }
        *slot = Some(r);
    }
    let mut out = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let record = match done[i].take() {
            Some(r) => r,
            None => {
                let r = evaluate_indexed(setup, &space.design(p), task, settings.episodes, seed, settings.fall_reward, i)?;
                if let Some(j) = journal.as_mut() {
                    j.append(&r)?;
                }
                progress(&r);
                r
            }
        };
        out.push(record);
    }
    Ok(out)
}
