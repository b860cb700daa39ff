//! Search space over cam designs.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::cam::{CamDesign, DEFAULT_SPRING_STIFFNESS};
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameterization {
    /// `(q_bar, r)` with `a = b = r` and `phi0 = 0`.
    Circular,
    /// `(q_bar, a, b, phi0)`.
    Elliptic,
}

/// `coefficients · x + offset ≥ 0` over the active coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub offset: f64,
}

impl LinearConstraint {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpace {
    pub parameterization: Parameterization,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
    #[serde(default = "default_stiffness")]
    pub spring_stiffness: f64,
}

fn default_stiffness() -> f64 {
    DEFAULT_SPRING_STIFFNESS
}

impl Default for DesignSpace {
    fn default() -> Self {
        Self::circular()
    }
}

impl DesignSpace {
    pub fn circular() -> Self {
        Self {
            parameterization: Parameterization::Circular,
            lower: vec![-0.6, 0.0],
            upper: vec![1.2, 0.1],
            constraints: Vec::new(),
            spring_stiffness: DEFAULT_SPRING_STIFFNESS,
        }
    }

    pub fn elliptic() -> Self {
        Self {
            parameterization: Parameterization::Elliptic,
            lower: vec![-0.6, 0.0, 0.0, -FRAC_PI_2],
            upper: vec![1.2, 0.1, 0.1, FRAC_PI_2],
            constraints: Vec::new(),
            spring_stiffness: DEFAULT_SPRING_STIFFNESS,
        }
    }

    pub fn dim(&self) -> usize {
        match self.parameterization {
            Parameterization::Circular => 2,
            Parameterization::Elliptic => 4,
        }
    }

    pub fn names(&self) -> &'static [&'static str] {
        match self.parameterization {
            Parameterization::Circular => &["q_bar", "r"],
            Parameterization::Elliptic => &["q_bar", "a", "b", "phi0"],
        }
    }

    pub fn design(&self, x: &[f64]) -> CamDesign {
        match self.parameterization {
            Parameterization::Circular => CamDesign::circular(x[0], x[1], self.spring_stiffness),
            Parameterization::Elliptic => CamDesign::new(x[0], x[1], x[2], x[3], self.spring_stiffness),
        }
    }

    /// Active coordinates of a design; circular spaces use the mean radius.
    pub fn point(&self, d: &CamDesign) -> Vec<f64> {
        match self.parameterization {
            Parameterization::Circular => vec![d.q_bar, 0.5 * (d.a + d.b)],
            Parameterization::Elliptic => d.vector().to_vec(),
        }
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| l <= v && v <= u)
    }

    pub fn feasible(&self, x: &[f64]) -> bool {
        self.in_bounds(x) && self.constraints.iter().all(|c| c.value(x) >= 0.0)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .map(|((v, l), u)| (v - l) / (u - l))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .map(|((v, l), h)| (l + v * (h - l)).clamp(*l, *h))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = self.dim();
        if self.lower.len() != d || self.upper.len() != d {
            return Err(ConfigError::invalid("design_space.lower", format!("expected {d} bounds")));
        }
        if !self.lower.iter().zip(&self.upper).all(|(l, u)| l.is_finite() && u.is_finite() && l < u) {
            return Err(ConfigError::invalid("design_space.lower", "need finite lower < upper"));
        }
        let radii = match self.parameterization {
            Parameterization::Circular => 1..2,
            Parameterization::Elliptic => 1..3,
        };
        if self.lower[radii].iter().any(|&l| l < 0.0) {
            return Err(ConfigError::invalid("design_space.lower", "cam radii must be non-negative"));
        }
        if !(self.spring_stiffness > 0.0) {
            return Err(ConfigError::invalid("design_space.spring_stiffness", "must be positive"));
        }
        if let Some(c) = self.constraints.iter().find(|c| c.coefficients.len() != d) {
            return Err(ConfigError::invalid(
                "design_space.constraints",
                format!("constraint has {} coefficients, expected {d}", c.coefficients.len()),
            ));
        }
        if !self.constraints.is_empty() && !self.has_feasible_point() {
            return Err(ConfigError::invalid("design_space.constraints", "no feasible design found"));
        }
        Ok(())
    }

    fn has_feasible_point(&self) -> bool {
        (0..4096).any(|i| self.feasible(&self.from_unit(&super::quasi_random(i, self.dim(), 0))))
    }
}
