//! Paired-seed comparison of two designs with bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cam::CamDesign;
use crate::error::OptError;
use crate::opt::evaluate::{run_episodes, EpisodeOutcome, FALL_REWARD};
use crate::sim::RolloutSetup;
use crate::task::TaskSpec;

pub const BOOTSTRAP_RESAMPLES: usize = 2000;
pub const CONFIDENCE: f64 = 0.95;

/// Point estimate with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Bootstrap interval of `stat` over resampled index sets.
pub fn bootstrap(n: usize, resamples: usize, seed: u64, stat: impl Fn(&[usize]) -> f64) -> Interval {
    let all: Vec<usize> = (0..n).collect();
    let mean = stat(&all);
    if n < 2 {
        return Interval { mean, lo: mean, hi: mean };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0; n];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.gen_range(0..n));
            stat(&idx)
        })
        .filter(|v| v.is_finite())
        .collect();
    if stats.is_empty() {
        return Interval { mean, lo: mean, hi: mean };
    }
    stats.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - CONFIDENCE);
    Interval {
        mean,
        lo: percentile(&stats, tail),
        hi: percentile(&stats, 1.0 - tail),
    }
}

pub fn bootstrap_mean(values: &[f64], resamples: usize, seed: u64) -> Interval {
    bootstrap(values.len(), resamples, seed, |idx| {
        idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub design: [f64; 4],
    pub falls: usize,
    pub cotr: Interval,
    pub tracking_error: Interval,
    pub mean_abs_knee_torque: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub episodes: usize,
    pub seed: u64,
    /// Episodes where both designs stayed up with a defined CoTr.
    pub paired: usize,
    pub a: DesignSummary,
    pub b: DesignSummary,
    /// `1 - CoTr_b / CoTr_a` over paired episodes.
    pub cotr_reduction: Interval,
    /// Paired `knee_a - knee_b`, N·m.
    pub knee_torque_difference: Interval,
    /// Paired `tracking_b - tracking_a`, m/s.
    pub tracking_difference: Interval,
}

fn paired(a: &[EpisodeOutcome], b: &[EpisodeOutcome]) -> Vec<(EpisodeOutcome, EpisodeOutcome)> {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.cotr.is_some() && y.cotr.is_some() && !x.fell && !y.fell)
        .map(|(x, y)| (*x, *y))
        .collect()
}

fn summary(design: &CamDesign, pairs: &[EpisodeOutcome], falls: usize, seed: u64) -> DesignSummary {
    let field = |f: fn(&EpisodeOutcome) -> f64, s| bootstrap_mean(&pairs.iter().map(f).collect::<Vec<_>>(), BOOTSTRAP_RESAMPLES, s);
    DesignSummary {
        design: design.vector(),
        falls,
        cotr: field(|o| o.cotr.unwrap_or(f64::NAN), seed),
        tracking_error: field(|o| o.tracking_error, seed ^ 1),
        mean_abs_knee_torque: field(|o| o.mean_abs_knee_torque, seed ^ 2),
    }
}

/// Runs both designs on the same `n` episode seeds and compares them.
pub fn cotr_comparison(
    setup: &RolloutSetup,
    a: &CamDesign,
    b: &CamDesign,
    task: &TaskSpec,
    n: usize,
    seed: u64,
) -> Result<ComparisonReport, OptError> {
    a.validate()?;
    b.validate()?;
    task.validate()?;
    let ea = run_episodes(setup, Some(a), task, n, seed, FALL_REWARD);
    let eb = run_episodes(setup, Some(b), task, n, seed, FALL_REWARD);
    Ok(compare_outcomes(a, b, &ea, &eb, seed))
}

/// Paired statistics for outcomes produced on identical seeds.
pub fn compare_outcomes(
    a: &CamDesign,
    b: &CamDesign,
    ea: &[EpisodeOutcome],
    eb: &[EpisodeOutcome],
    seed: u64,
) -> ComparisonReport {
    let pairs = paired(ea, eb);
    let pa: Vec<EpisodeOutcome> = pairs.iter().map(|p| p.0).collect();
    let pb: Vec<EpisodeOutcome> = pairs.iter().map(|p| p.1).collect();
    let boot_seed = seed ^ 0xb007;
    let cotr_reduction = bootstrap(pairs.len(), BOOTSTRAP_RESAMPLES, boot_seed ^ 3, |idx| {
        let (sa, sb) = idx.iter().fold((0.0, 0.0), |(x, y), &i| {
            (x + pairs[i].0.cotr.unwrap_or(0.0), y + pairs[i].1.cotr.unwrap_or(0.0))
        });
        1.0 - sb / sa
    });
    let diff = |f: fn(&EpisodeOutcome) -> f64, sign: f64, s| {
        let d: Vec<f64> = pairs.iter().map(|(x, y)| sign * (f(x) - f(y))).collect();
        bootstrap_mean(&d, BOOTSTRAP_RESAMPLES, s)
    };
    ComparisonReport {
        episodes: ea.len(),
        seed,
        paired: pairs.len(),
        a: summary(a, &pa, ea.iter().filter(|o| o.fell).count(), boot_seed),
        b: summary(b, &pb, eb.iter().filter(|o| o.fell).count(), boot_seed ^ 7),
        cotr_reduction,
        knee_torque_difference: diff(|o| o.mean_abs_knee_torque, 1.0, boot_seed ^ 4),
        tracking_difference: diff(|o| o.tracking_error, -1.0, boot_seed ^ 5),
    }
}
