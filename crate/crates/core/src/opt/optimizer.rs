//! GP + EI minimization loop with journaling.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::OptError;
use crate::opt::acquisition::propose_next;
use crate::opt::evaluate::{evaluate_indexed, DesignEvalRecord, FALL_REWARD};
use crate::opt::gp::gp_fit;
use crate::opt::journal::Journal;
use crate::opt::space::DesignSpace;
use crate::sim::RolloutSetup;
use crate::task::TaskSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    /// Total number of evaluations including the initial design.
    pub budget: usize,
    /// Quasi-random evaluations before the surrogate takes over.
    pub initial: usize,
    /// Episodes per evaluation.
    pub episodes: usize,
    pub fall_reward: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            budget: 25,
            initial: 8,
            episodes: 64,
            fall_reward: FALL_REWARD,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<(), OptError> {
        if self.initial < 2 {
            return Err(crate::error::ConfigError::invalid("optimizer.initial", "need at least 2 initial designs").into());
        }
        if self.budget < self.initial {
            return Err(OptError::BudgetTooSmall {
                budget: self.budget,
                initial: self.initial,
            });
        }
        if self.episodes == 0 {
            return Err(crate::error::ConfigError::invalid("optimizer.episodes", "must be at least 1").into());
        }
        Ok(())
    }
}

/// Initial design: the first `n` feasible scrambled quasi-random points.
pub fn initial_design(space: &DesignSpace, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut points = Vec::with_capacity(n);
    let mut index = 0;
    while points.len() < n && index < 1 << 16 {
        let x = space.from_unit(&super::quasi_random(index, space.dim(), seed));
        index += 1;
        if space.feasible(&x) {
            points.push(x);
        }
    }
    points
}

/// Point evaluated at iteration `i` given the history so far.
pub fn next_point(space: &DesignSpace, history: &[(Vec<f64>, f64)], initial: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let i = history.len();
    if i < initial.len() {
        return initial[i].clone();
    }
    let (xs, ys): (Vec<Vec<f64>>, Vec<f64>) = history.iter().cloned().unzip();
    let best = ys.iter().copied().fold(f64::INFINITY, f64::min);
    match gp_fit(&xs, &ys, &space.lower, &space.upper) {
        Ok(gp) => propose_next(&gp, space, best, seed ^ (i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d)),
        Err(_) => {
            let extra = initial_design(space, i + 1, seed ^ 0xfa11_bac4);
            extra[i].clone()
        }
    }
}

/// Minimizes `objective` over `space` with `budget` evaluations.
///
/// `objective(i, x)` returns the value at iteration `i`. Returns the history
/// in evaluation order.
pub fn minimize<E>(
    space: &DesignSpace,
    budget: usize,
    initial: usize,
    seed: u64,
    mut objective: impl FnMut(usize, &[f64]) -> Result<f64, E>,
) -> Result<Vec<(Vec<f64>, f64)>, E> {
    let init = initial_design(space, initial.min(budget), seed);
    let mut history: Vec<(Vec<f64>, f64)> = Vec::with_capacity(budget);
    while history.len() < budget {
        let x = next_point(space, &history, &init, seed);
        let f = objective(history.len(), &x)?;
        history.push((x, f));
    }
    Ok(history)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: DesignEvalRecord,
    pub history: Vec<DesignEvalRecord>,
}

/// Index of the smallest objective; ties go to the earliest record.
pub fn best_index(history: &[DesignEvalRecord]) -> Option<usize> {
    (0..history.len()).min_by(|&a, &b| history[a].objective.total_cmp(&history[b].objective))
}

/// Optimizes the cam design on `task`.
///
/// Every evaluation uses `seed` as its episode seed so designs are compared
/// on common random numbers. With a journal, completed evaluations are
/// replayed from disk instead of being re-run; `progress` sees each new
/// record and the best so far.
pub fn optimize(
    setup: &RolloutSetup,
    space: &DesignSpace,
    task: &TaskSpec,
    settings: &OptimizerSettings,
    seed: u64,
    journal: Option<(&Path, &str)>,
    mut progress: impl FnMut(&DesignEvalRecord, &DesignEvalRecord),
) -> Result<OptimizationResult, OptError> {
    settings.validate()?;
    space.validate()?;
    task.validate()?;
    let (mut journal, prior) = match journal {
        Some((path, header)) => {
            let (j, r) = Journal::open(path, header)?;
            (Some(j), r)
        }
        None => (None, Vec::new()),
    };
    let mut records: Vec<DesignEvalRecord> = Vec::with_capacity(settings.budget);
    minimize(space, settings.budget, settings.initial, seed, |i, x| {
        let design = space.design(x);
        let record = match prior.get(i) {
            Some(r) if r.index == i && r.design == design.vector() => r.clone(),
            Some(_) => return Err(OptError::Journal(format!("journal record {i} does not match the replayed run"))),
            None => {
                let r = evaluate_indexed(setup, &design, task, settings.episodes, seed, settings.fall_reward, i)?;
                if let Some(j) = journal.as_mut() {
                    j.append(&r)?;
                }
                r
            }
        };
        let f = record.objective;
        records.push(record);
        let best = &records[best_index(&records).unwrap_or(0)];
        progress(&records[i], best);
        Ok(f)
    })?;
    let best = records[best_index(&records).ok_or(OptError::TooFewRecords)?].clone();
    Ok(OptimizationResult { best, history: records })
}
