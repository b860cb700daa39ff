//! Expected improvement and its constrained maximization.

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::neldermead::NelderMead;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::opt::gp::Surrogate;
use crate::opt::space::DesignSpace;

pub const ACQUISITION_SEEDS: usize = 256;
const LOCAL_STARTS: usize = 8;
const LOCAL_ITERS: u64 = 120;

/// Closed-form expected improvement below `best` for a Gaussian posterior.
pub fn expected_improvement_from(mean: f64, variance: f64, best: f64) -> f64 {
    let sigma = variance.max(0.0).sqrt();
    let gap = best - mean;
    if sigma <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    let n = Normal::standard();
    (gap * n.cdf(z) + sigma * n.pdf(z)).max(0.0)
}

pub fn expected_improvement(surrogate: &Surrogate, point: &[f64], best: f64) -> f64 {
    let (m, v) = surrogate.predict(point);
    expected_improvement_from(m, v, best)
}

struct NegEi<'a> {
    surrogate: &'a Surrogate,
    space: &'a DesignSpace,
    best: f64,
}

impl NegEi<'_> {
    fn value(&self, u: &[f64]) -> Option<f64> {
        if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return None;
        }
        let x = self.space.from_unit(u);
        if !self.space.feasible(&x) {
            return None;
        }
        let (m, v) = self.surrogate.predict_unit(u);
        Some(expected_improvement_from(m, v, self.best))
    }
}

impl CostFunction for NegEi<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> Result<f64, ArgminError> {
        Ok(self.value(u).map_or(1.0, |ei| -ei))
    }
}

/// Feasible design maximizing expected improvement below `best`.
///
/// Local Nelder–Mead searches start from the best of `ACQUISITION_SEEDS`
/// scrambled quasi-random points; infeasible points are rejected. Falls back
/// to the best quasi-random sample.
pub fn propose_next(surrogate: &Surrogate, space: &DesignSpace, best: f64, seed: u64) -> Vec<f64> {
    let d = space.dim();
    let target = NegEi { surrogate, space, best };
    let mut seeds: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut index = 0;
    while seeds.len() < ACQUISITION_SEEDS && index < 64 * ACQUISITION_SEEDS {
        let u = super::quasi_random(index, d, seed);
        index += 1;
        if let Some(ei) = target.value(&u) {
            seeds.push((u, ei));
        }
    }
    if seeds.is_empty() {
        return space.from_unit(&vec![0.5; d]);
    }
    seeds.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut best_u = seeds[0].clone();
    for (start, _) in seeds.iter().take(LOCAL_STARTS) {
        let mut simplex = vec![start.clone()];
        for i in 0..d {
            let mut v = start.clone();
            v[i] += if v[i] > 0.5 { -0.05 } else { 0.05 };
            simplex.push(v);
        }
        let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(1e-12) else {
            continue;
        };
        let cost = NegEi { surrogate, space, best };
        let Ok(res) = Executor::new(cost, solver).configure(|s| s.max_iters(LOCAL_ITERS)).run() else {
            continue;
        };
        if let Some(u) = res.state().best_param.clone() {
            if let Some(ei) = target.value(&u) {
                if ei > best_u.1 {
                    best_u = (u, ei);
                }
            }
        }
    }
    space.from_unit(&best_u.0)
}
