//! Design objective, surrogate optimization, sweeps and baselines.

pub mod acquisition;
pub mod compare;
pub mod evaluate;
pub mod first_principles;
pub mod gp;
pub mod journal;
pub mod optimizer;
pub mod space;
pub mod sweep;

pub use acquisition::{expected_improvement, expected_improvement_from, propose_next};
pub use compare::{bootstrap_mean, cotr_comparison, ComparisonReport, DesignSummary, Interval};
pub use evaluate::{evaluate_design, episode_seed, run_episodes, DesignEvalRecord, EpisodeOutcome, FALL_REWARD};
pub use first_principles::{first_principles_design, BalancePoint, FirstPrinciplesCurve, DEFAULT_Q_REF};
pub use gp::{gp_fit, Hyperparameters, Surrogate};
pub use journal::{load_journal, parse_journal, Journal};
pub use optimizer::{best_index, minimize, optimize, OptimizationResult, OptimizerSettings};
pub use space::{DesignSpace, LinearConstraint, Parameterization};
pub use sweep::{grid_sweep, sweep_points, SweepSettings};

/// Owen-scrambled Sobol point `index` in `[0, 1)^dim`.
pub fn quasi_random(index: usize, dim: usize, seed: u64) -> Vec<f64> {
    let seed = (seed ^ (seed >> 32)) as u32;
    (0..dim)
        .map(|d| sobol_burley::sample(index as u32, d as u32, seed) as f64)
        .collect()
}
