use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default central-difference step for potentials without an analytic gradient.
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-5;

fn default_step() -> f64 {
    DEFAULT_GRADIENT_STEP
}

/// External potential `V(x)`, the objective the trajectory descends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `½ ω² x²`
    Harmonic { omega: f64 },
    /// `a x⁴`
    Quartic { strength: f64 },
    /// `∑_k c_k x^k`
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise-linear through `(x_k, v_k)`, constant beyond the table ends.
    Tabulated {
        x: Vec<f64>,
        v: Vec<f64>,
        #[serde(default = "default_step")]
        step: f64,
    },
}

impl PotentialSpec {
    pub fn harmonic(omega: f64) -> Self {
        PotentialSpec::Harmonic { omega }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Harmonic { omega } => {
                if !(*omega > 0.0) || !omega.is_finite() {
                    return Err(Error::param("omega", format!("must be positive, got {omega}")));
                }
            }
            PotentialSpec::Quartic { strength } => {
                if !strength.is_finite() {
                    return Err(Error::param("strength", "must be finite"));
                }
            }
            PotentialSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::param(
                        "coefficients",
                        "need at least one finite coefficient",
                    ));
                }
            }
            PotentialSpec::Tabulated { x, v, step } => {
                if x.len() < 2 || x.len() != v.len() {
                    return Err(Error::param(
                        "x",
                        format!("need >= 2 points and matching lengths ({} vs {})", x.len(), v.len()),
                    ));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::param("x", "table abscissae must strictly increase"));
                }
                if x.iter().chain(v).any(|a| !a.is_finite()) {
                    return Err(Error::param("v", "table entries must be finite"));
                }
                if !(*step > 0.0) || !step.is_finite() {
                    return Err(Error::param("step", format!("must be positive, got {step}")));
                }
            }
        }
        Ok(())
    }

    /// Trap frequency when the potential is harmonic.
    pub fn omega(&self) -> Option<f64> {
        match self {
            PotentialSpec::Harmonic { omega } => Some(*omega),
            _ => None,
        }
    }

    pub fn has_analytic_gradient(&self) -> bool {
        !matches!(self, PotentialSpec::Tabulated { .. })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Harmonic { omega } => 0.5 * omega * omega * x * x,
            PotentialSpec::Quartic { strength } => strength * x * x * x * x,
            PotentialSpec::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            PotentialSpec::Tabulated { x: xs, v, .. } => {
                if x <= xs[0] {
                    return v[0];
                }
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return v[last];
                }
                let j = xs.partition_point(|&a| a <= x) - 1;
                let w = (x - xs[j]) / (xs[j + 1] - xs[j]);
                v[j] + w * (v[j + 1] - v[j])
            }
        }
    }

    pub fn gradient(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Harmonic { omega } => omega * omega * x,
            PotentialSpec::Quartic { strength } => 4.0 * strength * x * x * x,
            PotentialSpec::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
            PotentialSpec::Tabulated { step, .. } => {
                (self.evaluate(x + step) - self.evaluate(x - step)) / (2.0 * step)
            }
        }
    }

    /// `V` sampled on a set of points.
    pub fn sample(&self, xs: impl IntoIterator<Item = f64>) -> Vec<f64> {
        xs.into_iter().map(|x| self.evaluate(x)).collect()
    }
}
