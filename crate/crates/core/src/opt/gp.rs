//! Gaussian-process surrogate with an ARD squared-exponential kernel.

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::OptError;

/// Lower bound on the standardized noise variance.
pub const NOISE_FLOOR: f64 = 1e-8;
/// Floor used after an ill-conditioned fit.
pub const RAISED_NOISE_FLOOR: f64 = 1e-6;
pub const RESTARTS: usize = 8;
const MAX_ITERS: u64 = 300;
const LOG_SIGNAL: (f64, f64) = (-4.6, 4.6);
const LOG_LENGTH: (f64, f64) = (-4.6, 2.3);
const LOG_NOISE_MAX: f64 = 0.0;
/// Standard deviation of the normal prior on log noise variance, centred on
/// the noise floor.
const LOG_NOISE_PRIOR_SD: f64 = 6.0;

/// Kernel hyperparameters in standardized units.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub signal_variance: f64,
    /// Per-dimension lengthscales on the unit box.
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

impl Hyperparameters {
    fn from_log(theta: &[f64]) -> Self {
        let d = theta.len() - 2;
        Self {
            signal_variance: theta[0].exp(),
            lengthscales: theta[1..=d].iter().map(|v| v.exp()).collect(),
            noise_variance: theta[d + 1].exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Surrogate {
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<Vec<f64>>,
    y_mean: f64,
    y_scale: f64,
    hyper: Hyperparameters,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

fn kernel(h: &Hyperparameters, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&h.lengthscales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    h.signal_variance * (-0.5 * r2).exp()
}

fn gram(h: &Hyperparameters, x: &[Vec<f64>]) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| {
        kernel(h, &x[i], &x[j]) + if i == j { h.noise_variance } else { 0.0 }
    })
}

fn neg_log_likelihood(h: &Hyperparameters, x: &[Vec<f64>], y: &DVector<f64>) -> Option<f64> {
    let chol = gram(h, x).cholesky()?;
    let alpha = chol.solve(y);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let n = y.len() as f64;
    Some(0.5 * y.dot(&alpha) + log_det + 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

struct Likelihood<'a> {
    x: &'a [Vec<f64>],
    y: &'a DVector<f64>,
    bounds: Vec<(f64, f64)>,
}

impl Likelihood<'_> {
    fn project(&self, theta: &[f64]) -> (Vec<f64>, f64) {
        let mut excess = 0.0;
        let p = theta
            .iter()
            .zip(&self.bounds)
            .map(|(v, (lo, hi))| {
                let c = v.clamp(*lo, *hi);
                excess += (v - c).powi(2);
                c
            })
            .collect();
        (p, excess)
    }
}

impl CostFunction for Likelihood<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Vec<f64>) -> Result<f64, ArgminError> {
        let (p, excess) = self.project(theta);
        let nll = neg_log_likelihood(&Hyperparameters::from_log(&p), self.x, self.y).unwrap_or(1e10);
        let prior = 0.5 * ((p[p.len() - 1] - NOISE_FLOOR.ln()) / LOG_NOISE_PRIOR_SD).powi(2);
        Ok(nll + prior + 1e3 * excess)
    }
}

/// Averages targets of identical inputs, keeping first-occurrence order.
pub fn deduplicate(inputs: &[Vec<f64>], targets: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for (x, &y) in inputs.iter().zip(targets) {
        match xs.iter().position(|u| u == x) {
            Some(i) => {
                sums[i].0 += y;
                sums[i].1 += 1;
            }
            None => {
                xs.push(x.clone());
                sums.push((y, 1));
            }
        }
    }
    (xs, sums.into_iter().map(|(s, n)| s / n as f64).collect())
}

fn nelder_mead(cost: Likelihood, start: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let mut simplex = vec![start.clone()];
    for i in 0..start.len() {
        let mut v = start.clone();
        v[i] += 0.7;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-7).ok()?;
    let res = Executor::new(cost, solver)
        .configure(|s| s.max_iters(MAX_ITERS))
        .run()
        .ok()?;
    let state = res.state();
    Some((state.best_param.clone()?, state.best_cost))
}

/// Fits a surrogate to `(inputs, targets)` on the box `[lower, upper]`.
///
/// Hyperparameters maximize the marginal likelihood, with a weak log-normal
/// prior on the noise variance, over `RESTARTS` Nelder–Mead runs in log space.
pub fn gp_fit(inputs: &[Vec<f64>], targets: &[f64], lower: &[f64], upper: &[f64]) -> Result<Surrogate, OptError> {
    let (raw, y) = deduplicate(inputs, targets);
    if raw.len() < 2 {
        return Err(OptError::TooFewRecords);
    }
    let d = lower.len();
    let x: Vec<Vec<f64>> = raw.iter().map(|p| to_unit(p, lower, upper)).collect();
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let sd = (y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n).sqrt();
    let y_scale = if sd > 1e-12 { sd } else { 1.0 };
    let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));

    let mut floor = NOISE_FLOOR;
    for _ in 0..8 {
        let mut bounds = vec![LOG_SIGNAL];
        bounds.extend(std::iter::repeat(LOG_LENGTH).take(d));
        bounds.push((floor.ln(), LOG_NOISE_MAX));
        let objective = |theta: &[f64]| Likelihood { x: &x, y: &ys, bounds: bounds.clone() }.cost(&theta.to_vec());
        let mut best: Option<(Vec<f64>, f64)> = None;
        for r in 0..RESTARTS {
            let start: Vec<f64> = if r == 0 {
                let mut s = vec![0.0];
                s.extend(std::iter::repeat((0.3f64).ln()).take(d));
                s.push((1e-2f64).max(floor).ln());
                s
            } else {
                super::quasi_random(r - 1, d + 2, 0x6a09)
                    .iter()
                    .zip(&bounds)
                    .map(|(u, (lo, hi))| lo + u * (hi - lo))
                    .collect()
            };
            let cost = Likelihood { x: &x, y: &ys, bounds: bounds.clone() };
            let found = nelder_mead(cost, start.clone()).or_else(|| objective(&start).ok().map(|c| (start, c)));
            if let Some((theta, c)) = found {
                if c.is_finite() && best.as_ref().is_none_or(|b| c < b.1) {
                    best = Some((theta, c));
                }
            }
        }
        let Some((theta, _)) = best else {
            floor = (floor * 100.0).max(RAISED_NOISE_FLOOR);
            continue;
        };
        let (theta, _) = Likelihood { x: &x, y: &ys, bounds }.project(&theta);
        let hyper = Hyperparameters::from_log(&theta);
        match Surrogate::assemble(lower, upper, x.clone(), ys.clone(), y_mean, y_scale, hyper) {
            Ok(s) => return Ok(s),
            Err(_) => floor = (floor * 100.0).max(RAISED_NOISE_FLOOR),
        }
    }
    Err(OptError::IllConditioned)
}

fn to_unit(p: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    p.iter()
        .zip(lower)
        .zip(upper)
        .map(|((v, l), u)| (v - l) / (u - l))
        .collect()
}

impl Surrogate {
    fn assemble(
        lower: &[f64],
        upper: &[f64],
        x: Vec<Vec<f64>>,
        ys: DVector<f64>,
        y_mean: f64,
        y_scale: f64,
        hyper: Hyperparameters,
    ) -> Result<Self, OptError> {
        let chol = gram(&hyper, &x).cholesky().ok_or(OptError::IllConditioned)?;
        let alpha = chol.solve(&ys);
        if alpha.iter().any(|v| !v.is_finite()) {
            return Err(OptError::IllConditioned);
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            x,
            y_mean,
            y_scale,
            hyper,
            chol,
            alpha,
        })
    }

    /// Refits the posterior with fixed hyperparameters.
    pub fn with_hyperparameters(
        inputs: &[Vec<f64>],
        targets: &[f64],
        lower: &[f64],
        upper: &[f64],
        hyper: Hyperparameters,
    ) -> Result<Self, OptError> {
        let (raw, y) = deduplicate(inputs, targets);
        if raw.is_empty() {
            return Err(OptError::TooFewRecords);
        }
        let x = raw.iter().map(|p| to_unit(p, lower, upper)).collect();
        let n = y.len() as f64;
        let y_mean = y.iter().sum::<f64>() / n;
        let sd = (y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n).sqrt();
        let y_scale = if sd > 1e-12 { sd } else { 1.0 };
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
        Self::assemble(lower, upper, x, ys, y_mean, y_scale, hyper)
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    /// Signal variance in target units.
    pub fn signal_variance(&self) -> f64 {
        self.hyper.signal_variance * self.y_scale * self.y_scale
    }

    /// Observation noise variance in target units.
    pub fn noise_variance(&self) -> f64 {
        self.hyper.noise_variance * self.y_scale * self.y_scale
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Posterior mean and variance of the latent function at `point`.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        self.predict_unit(&to_unit(point, &self.lower, &self.upper))
    }

    /// As [`Surrogate::predict`] with `u` in unit-box coordinates.
    pub fn predict_unit(&self, u: &[f64]) -> (f64, f64) {
        let k = DVector::from_iterator(self.x.len(), self.x.iter().map(|xi| kernel(&self.hyper, xi, u)));
        let mean = k.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k)
            .unwrap_or_else(|| DVector::zeros(k.len()));
        let var = (self.hyper.signal_variance - v.dot(&v)).max(0.0);
        (self.y_mean + self.y_scale * mean, var * self.y_scale * self.y_scale)
    }
}
