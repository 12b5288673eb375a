//! First and second spatial derivatives of grid functions.
//!
//! The default is second-order central differences: periodic grids wrap,
//! closed grids fall back to second-order one-sided stencils at the two ends.
//! Periodic grids can also be differentiated spectrally.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    #[default]
    CentralDifference,
    Spectral,
}

impl DerivativeScheme {
    pub fn check(self, grid: &SpatialGrid) -> Result<()> {
        if self == DerivativeScheme::Spectral && !grid.is_periodic() {
            return Err(Error::InvalidGrid(
                "spectral derivatives need a periodic grid".into(),
            ));
        }
        Ok(())
    }
}

fn check_len(grid: &SpatialGrid, f: &[f64]) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: f.len(),
        });
    }
    Ok(())
}

/// `∂f/∂x` on the grid.
pub fn gradient(grid: &SpatialGrid, f: &[f64], scheme: DerivativeScheme) -> Result<Vec<f64>> {
    check_len(grid, f)?;
    scheme.check(grid)?;
    Ok(match scheme {
        DerivativeScheme::CentralDifference => gradient_fd(grid, f, |a, b| a - b),
        DerivativeScheme::Spectral => spectral_real(grid, f, 1),
    })
}

/// `∂²f/∂x²` on the grid.
pub fn laplacian(grid: &SpatialGrid, f: &[f64], scheme: DerivativeScheme) -> Result<Vec<f64>> {
    check_len(grid, f)?;
    scheme.check(grid)?;
    Ok(match scheme {
        DerivativeScheme::CentralDifference => laplacian_fd(grid, f),
        DerivativeScheme::Spectral => spectral_real(grid, f, 2),
    })
}

/// Central-difference gradient where every difference `f_a − f_b` is routed
/// through `diff`. Phase gradients pass a wrapping difference here.
pub(crate) fn gradient_fd(
    grid: &SpatialGrid,
    f: &[f64],
    diff: impl Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let n = f.len();
    let h = grid.dx();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = diff(f[j + 1], f[j - 1]) / (2.0 * h);
    }
    if grid.is_periodic() {
        out[0] = diff(f[1], f[n - 1]) / (2.0 * h);
        out[n - 1] = diff(f[0], f[n - 2]) / (2.0 * h);
    } else {
        // (−3f0 + 4f1 − f2) / 2h, written as differences against f0
        out[0] = (4.0 * diff(f[1], f[0]) - diff(f[2], f[0])) / (2.0 * h);
        out[n - 1] = (4.0 * diff(f[n - 1], f[n - 2]) - diff(f[n - 1], f[n - 3])) / (2.0 * h);
    }
    out
}

fn laplacian_fd(grid: &SpatialGrid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let h2 = grid.dx() * grid.dx();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2;
    }
    if grid.is_periodic() {
        out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) / h2;
        out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) / h2;
    } else {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    }
    out
}

fn spectral_real(grid: &SpatialGrid, f: &[f64], order: u32) -> Vec<f64> {
    let data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectral_complex(grid, &data, order)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// Spectral derivative of order `order` of a periodic complex grid function.
pub(crate) fn spectral_complex(grid: &SpatialGrid, f: &[Complex64], order: u32) -> Vec<Complex64> {
    let n = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = f.to_vec();
    fwd.process(&mut buf);
    let ks = grid.wavenumbers();
    let nyquist = if n % 2 == 0 { Some(n / 2) } else { None };
    for (j, (z, &k)) in buf.iter_mut().zip(&ks).enumerate() {
        // odd derivatives of the Nyquist mode are not representable
        if order % 2 == 1 && Some(j) == nyquist {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        *z *= Complex64::new(0.0, k).powu(order);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}
