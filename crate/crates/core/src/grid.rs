//! Uniform one-dimensional position grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of grid points accepted by [`SpatialGrid::new`].
pub const MIN_POINTS: usize = 8;

/// Uniform 1-D discretization of `[x_min, x_max]`.
///
/// A non-periodic grid contains both end points, so `dx = (x_max − x_min)/(n − 1)`.
/// A periodic grid identifies `x_max` with `x_min` and stores `n` points with
/// `dx = (x_max − x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
    periodic: bool,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize, periodic: bool) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n}"
            )));
        }
        let cells = if periodic { n } else { n - 1 };
        let dx = (x_max - x_min) / cells as f64;
        if !(dx > 0.0) {
            return Err(Error::InvalidGrid(format!("degenerate spacing {dx}")));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            dx,
            periodic,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Domain length `x_max − x_min`.
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Position of point `j`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    pub fn positions(&self) -> Vec<f64> {
        self.points().collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Whether the spectral (FFT) propagator can run on this grid.
    pub fn supports_spectral(&self) -> bool {
        self.periodic && self.n.is_power_of_two()
    }

    /// Angular wavenumbers in FFT order (`0, 1, …, n/2−1, −n/2, …, −1` times `2π/L`).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let scale = 2.0 * std::f64::consts::PI / (self.n as f64 * self.dx);
        (0..n)
            .map(|j| {
                let k = if j < (n + 1) / 2 { j } else { j - n };
                k as f64 * scale
            })
            .collect()
    }

    /// Index of the point nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx).round();
        if j <= 0.0 {
            0
        } else {
            (j as usize).min(self.n - 1)
        }
    }
}
