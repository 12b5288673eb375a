//! Quantum potential and the disruptor field derived from it.
//!
//! Both are built from the regularized curvature ratio `∇²R / max(R, ε)`:
//!
//! ```text
//! Q   = −(ħ² / 2m)  ∇²R / R
//! Dis =  (ħ² / 2m²) ∇(∇²R / R) = −∇Q / m
//! ```

use serde::{Deserialize, Serialize};

use crate::derivative::{gradient, laplacian, DerivativeScheme};
use crate::error::{Error, Result};
use crate::fields::NODE_DENSITY_FLOOR;
use crate::grid::SpatialGrid;
use crate::params::PhysicsParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    QuantumPotential,
    Disruptor,
    Potential,
    Generic,
}

/// Real values on a grid, tagged with what they represent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
    pub kind: FieldKind,
    /// Number of points where the amplitude was lifted to the floor.
    pub regularized: usize,
}

impl ScalarField {
    pub fn new(grid: SpatialGrid, values: Vec<f64>, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            kind,
            regularized: 0,
        })
    }

    /// Linear interpolation at `x`; see [`disruptor_at`].
    pub fn sample(&self, x: f64) -> Result<f64> {
        sample_linear(&self.grid, &self.values, x)
    }
}

/// `∇²R / max(R, ε)` and the count of floored points.
fn curvature_ratio(
    grid: &SpatialGrid,
    r: &[f64],
    scheme: DerivativeScheme,
) -> Result<(Vec<f64>, usize)> {
    if let Some(bad) = r.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::param("R", format!("amplitude must be >= 0, found {bad}")));
    }
    let lap = laplacian(grid, r, scheme)?;
    let mut regularized = 0;
    let ratio = lap
        .iter()
        .zip(r)
        .map(|(l, &a)| {
            if a < NODE_DENSITY_FLOOR {
                regularized += 1;
            }
            l / a.max(NODE_DENSITY_FLOOR)
        })
        .collect();
    Ok((ratio, regularized))
}

pub fn quantum_potential(
    grid: &SpatialGrid,
    r: &[f64],
    params: &PhysicsParams,
) -> Result<ScalarField> {
    quantum_potential_with(grid, r, params, DerivativeScheme::CentralDifference)
}

pub fn quantum_potential_with(
    grid: &SpatialGrid,
    r: &[f64],
    params: &PhysicsParams,
    scheme: DerivativeScheme,
) -> Result<ScalarField> {
    let (ratio, regularized) = curvature_ratio(grid, r, scheme)?;
    let prefactor = -params.hbar() * params.hbar() / (2.0 * params.m());
    Ok(ScalarField {
        grid: *grid,
        values: ratio.into_iter().map(|v| prefactor * v).collect(),
        kind: FieldKind::QuantumPotential,
        regularized,
    })
}

pub fn disruptor_field(
    grid: &SpatialGrid,
    r: &[f64],
    params: &PhysicsParams,
) -> Result<ScalarField> {
    disruptor_field_with(grid, r, params, DerivativeScheme::CentralDifference)
}

pub fn disruptor_field_with(
    grid: &SpatialGrid,
    r: &[f64],
    params: &PhysicsParams,
    scheme: DerivativeScheme,
) -> Result<ScalarField> {
    let (ratio, regularized) = curvature_ratio(grid, r, scheme)?;
    let slope = gradient(grid, &ratio, scheme)?;
    let m = params.m();
    let prefactor = params.hbar() * params.hbar() / (2.0 * m * m);
    Ok(ScalarField {
        grid: *grid,
        values: slope.into_iter().map(|v| prefactor * v).collect(),
        kind: FieldKind::Disruptor,
        regularized,
    })
}

/// Evaluates a field at a trajectory point by linear interpolation.
pub fn disruptor_at(field: &ScalarField, x: f64) -> Result<f64> {
    field.sample(x)
}

pub(crate) fn sample_linear(grid: &SpatialGrid, values: &[f64], x: f64) -> Result<f64> {
    if !x.is_finite() || !grid.contains(x) {
        return Err(Error::OutOfDomain {
            x,
            min: grid.x_min(),
            max: grid.x_max(),
        });
    }
    let n = grid.len();
    let t = (x - grid.x_min()) / grid.dx();
    let nearest = t.round();
    if (t - nearest).abs() < 1e-9 {
        return Ok(values[nearest as usize % n]);
    }
    let mut j = t.floor() as usize;
    if !grid.is_periodic() {
        j = j.min(n - 2);
    }
    let w = t - j as f64;
    let left = values[j % n];
    let right = values[(j + 1) % n];
    Ok(left + w * (right - left))
}
