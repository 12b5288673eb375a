use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// Complex amplitudes `ψ_j` on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl Wavefunction {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_values(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Wraps amplitudes and rescales them to unit norm.
    pub fn normalized(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        let mut psi = Self::from_values(grid, values)?;
        psi.normalize()?;
        Ok(psi)
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    /// Normalized Gaussian packet whose density has standard deviation `sigma`,
    /// centred at `center` and carrying mean momentum `p0`.
    pub fn gaussian(
        grid: SpatialGrid,
        center: f64,
        sigma: f64,
        p0: f64,
        hbar: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        if p0 != 0.0 && !(hbar > 0.0) {
            return Err(Error::param("hbar", "a moving packet needs hbar > 0"));
        }
        let k0 = if p0 == 0.0 { 0.0 } else { p0 / hbar };
        let psi = Self::from_fn(grid, |x| {
            let d = x - center;
            Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * d)
        });
        Self::normalized(grid, psi.values)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ρ_j = |ψ_j|²`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `R_j = |ψ_j|`.
    pub fn amplitude(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    /// Multiplies every amplitude by `e^{iθ}`.
    pub fn rotate_phase(&mut self, theta: f64) {
        let w = Complex64::from_polar(1.0, theta);
        self.values.iter_mut().for_each(|z| *z *= w);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|z| z * factor).collect(),
        }
    }

    /// Index of the density maximum (first one on ties).
    pub fn density_argmax(&self) -> usize {
        argmax(self.values.iter().map(|z| z.norm_sqr()))
    }
}

pub(crate) fn argmax(it: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (j, v) in it.enumerate() {
        if v > best_val {
            best_val = v;
            best = j;
        }
    }
    best
}

/// `∑_j |ψ_j|² dx`.
pub fn norm(psi: &Wavefunction) -> f64 {
    psi.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * psi.grid.dx()
}

/// `⟨x⟩ = ∑_j x_j ρ_j dx`.
pub fn expectation_position(psi: &Wavefunction) -> f64 {
    let g = psi.grid;
    psi.values
        .iter()
        .enumerate()
        .map(|(j, z)| g.x(j) * z.norm_sqr())
        .sum::<f64>()
        * g.dx()
}

/// Density variance `⟨x²⟩ − ⟨x⟩²` of a normalized state.
pub fn position_variance(psi: &Wavefunction) -> f64 {
    let g = psi.grid;
    let mean = expectation_position(psi);
    psi.values
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let d = g.x(j) - mean;
            d * d * z.norm_sqr()
        })
        .sum::<f64>()
        * g.dx()
}
