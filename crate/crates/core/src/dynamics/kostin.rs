//! Propagators for the Kostin (Schrödinger–Langevin) equation
//!
//! ```text
//! iħ ∂ψ/∂t = −(ħ²/2m) ∂²ψ/∂x² + V ψ + μ (S − ⟨S⟩) ψ
//! ```
//!
//! Position-space part: with `ρ` frozen, the phase-action obeys
//! `∂S/∂t = −V − μ (S − ⟨S⟩)`, a linear relaxation that is integrated exactly
//! over the sub-step. Writing `D = S − ⟨S⟩` and `E(τ) = (1 − e^{−μτ})/μ`:
//!
//! ```text
//! ΔS = −⟨V⟩ τ − E(τ) (V − ⟨V⟩ + μ D)
//! ```
//!
//! which collapses to `ΔS = −V τ` for `μ = 0`. The update is a real phase, so
//! the norm is untouched.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::unwrapped_phase;
use crate::grid::SpatialGrid;
use crate::params::PhysicsParams;
use crate::potential::PotentialSpec;
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Strang splitting: half kinetic (FFT), full potential + friction, half kinetic.
    #[default]
    SplitStepSpectral,
    /// Half friction, Crank–Nicolson for `T + V` with Dirichlet walls, half friction.
    CrankNicolson,
}

/// `(1 − e^{−μτ})/μ`, continuous at `μ = 0`.
fn relaxation_weight(mu: f64, tau: f64) -> f64 {
    let z = mu * tau;
    if z.abs() < 1e-8 {
        tau * (1.0 - 0.5 * z)
    } else {
        -(-z).exp_m1() / mu
    }
}

/// Applies the exact position-space flow of `V + μ(S − ⟨S⟩)` over `tau`.
///
/// `v = None` drops the external potential (friction only).
fn apply_phase_flow(
    psi: &mut Wavefunction,
    v: Option<&[f64]>,
    params: &PhysicsParams,
    tau: f64,
) -> Result<()> {
    let hbar = params.hbar();
    let mu = params.mu();
    let rho = psi.density();
    let total: f64 = rho.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let (phase, _) = unwrapped_phase(psi, &rho)?;
    // ρ-weighted means; S is carried in radians until the final ħ factor
    let mean_phase = phase.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() / total;
    let mean_v = v.map_or(0.0, |v| {
        v.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() / total
    });
    let e = relaxation_weight(mu, tau);
    for (j, z) in psi.values_mut().iter_mut().enumerate() {
        let vj = v.map_or(0.0, |v| v[j]);
        let deviation = hbar * (phase[j] - mean_phase);
        let ds = -mean_v * tau - e * (vj - mean_v + mu * deviation);
        *z *= Complex64::from_polar(1.0, ds / hbar);
    }
    Ok(())
}

struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    half_kinetic: Vec<Complex64>,
    /// `e^{−iV dt/ħ}`, used when `μ = 0`
    linear_potential: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    fn new(grid: &SpatialGrid, v: &[f64], params: &PhysicsParams, dt: f64) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let (hbar, m) = (params.hbar(), params.m());
        let norm = 1.0 / n as f64;
        // the 1/n of the inverse transform is folded into the kinetic factor
        let half_kinetic = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex64::from_polar(norm, -hbar * k * k * dt / (4.0 * m)))
            .collect();
        let linear_potential = v
            .iter()
            .map(|vj| Complex64::from_polar(1.0, -vj * dt / hbar))
            .collect();
        Self {
            forward,
            inverse,
            half_kinetic,
            linear_potential,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn kinetic_half(&mut self, psi: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut()
            .zip(&self.half_kinetic)
            .for_each(|(z, k)| *z *= k);
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }
}

/// Tridiagonal Crank–Nicolson for `H = −(ħ²/2m)∂² + V` with `ψ = 0` outside the grid.
struct CrankNicolson {
    /// `i dt / 2ħ` times the off-diagonal of `H`
    off: Complex64,
    /// `i dt / 2ħ` times the diagonal of `H`
    diag: Vec<Complex64>,
    rhs: Vec<Complex64>,
    c_prime: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(grid: &SpatialGrid, v: &[f64], params: &PhysicsParams, dt: f64) -> Self {
        let (hbar, m, dx) = (params.hbar(), params.m(), grid.dx());
        let kin = hbar * hbar / (2.0 * m * dx * dx);
        let a = Complex64::new(0.0, dt / (2.0 * hbar));
        Self {
            off: a * (-kin),
            diag: v.iter().map(|vj| a * (2.0 * kin + vj)).collect(),
            rhs: vec![Complex64::new(0.0, 0.0); v.len()],
            c_prime: vec![Complex64::new(0.0, 0.0); v.len()],
        }
    }

    /// Solves `(1 + A) ψ' = (1 − A) ψ` in place.
    fn step(&mut self, psi: &mut [Complex64]) {
        let n = psi.len();
        let one = Complex64::new(1.0, 0.0);
        let off = self.off;
        for j in 0..n {
            let mut r = (one - self.diag[j]) * psi[j];
            if j > 0 {
                r -= off * psi[j - 1];
            }
            if j + 1 < n {
                r -= off * psi[j + 1];
            }
            self.rhs[j] = r;
        }
        // Thomas algorithm on the constant off-diagonal system
        let mut denom = one + self.diag[0];
        self.c_prime[0] = off / denom;
        psi[0] = self.rhs[0] / denom;
        for j in 1..n {
            denom = one + self.diag[j] - off * self.c_prime[j - 1];
            self.c_prime[j] = off / denom;
            psi[j] = (self.rhs[j] - off * psi[j - 1]) / denom;
        }
        for j in (0..n - 1).rev() {
            let next = psi[j + 1];
            psi[j] -= self.c_prime[j] * next;
        }
    }
}

enum Engine {
    Spectral(Spectral),
    CrankNicolson(CrankNicolson),
}

/// One-run propagator with precomputed operators.
pub struct KostinPropagator {
    grid: SpatialGrid,
    params: PhysicsParams,
    v: Vec<f64>,
    dt: f64,
    scheme: Scheme,
    engine: Engine,
}

impl std::fmt::Debug for KostinPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KostinPropagator")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("dt", &self.dt)
            .field("scheme", &self.scheme)
            .finish_non_exhaustive()
    }
}

impl KostinPropagator {
    pub fn new(
        grid: SpatialGrid,
        potential: &PotentialSpec,
        params: PhysicsParams,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if !(params.hbar() > 0.0) {
            return Err(Error::param("hbar", "wave propagation needs ħ > 0"));
        }
        potential.validate()?;
        let v = potential.sample(grid.points());
        let engine = match scheme {
            Scheme::SplitStepSpectral => {
                if !grid.supports_spectral() {
                    return Err(Error::InvalidGrid(
                        "split-step propagation needs a periodic grid with a power-of-two size"
                            .into(),
                    ));
                }
                Engine::Spectral(Spectral::new(&grid, &v, &params, dt))
            }
            Scheme::CrankNicolson => {
                if grid.is_periodic() {
                    return Err(Error::InvalidGrid(
                        "Crank-Nicolson propagation runs on closed (Dirichlet) grids".into(),
                    ));
                }
                Engine::CrankNicolson(CrankNicolson::new(&grid, &v, &params, dt))
            }
        };
        Ok(Self {
            grid,
            params,
            v,
            dt,
            scheme,
            engine,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Potential sampled on the grid.
    pub fn potential_values(&self) -> &[f64] {
        &self.v
    }

    /// Advances `psi` by one time step.
    pub fn step(&mut self, psi: &mut Wavefunction) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::InvalidGrid(
                "wavefunction lives on a different grid than the propagator".into(),
            ));
        }
        let linear = self.params.mu() == 0.0;
        match &mut self.engine {
            Engine::Spectral(sp) => {
                sp.kinetic_half(psi.values_mut());
                if linear {
                    psi.values_mut()
                        .iter_mut()
                        .zip(&sp.linear_potential)
                        .for_each(|(z, w)| *z *= w);
                } else {
                    apply_phase_flow(psi, Some(&self.v), &self.params, self.dt)?;
                }
                sp.kinetic_half(psi.values_mut());
            }
            Engine::CrankNicolson(cn) => {
                if !linear {
                    apply_phase_flow(psi, None, &self.params, 0.5 * self.dt)?;
                }
                cn.step(psi.values_mut());
                if !linear {
                    apply_phase_flow(psi, None, &self.params, 0.5 * self.dt)?;
                }
            }
        }
        Ok(())
    }
}

/// One step of the Kostin equation with a freshly built propagator.
///
/// Uses the split-step scheme when the grid allows it and Crank–Nicolson
/// otherwise. Loops should hold a [`KostinPropagator`] instead.
pub fn kostin_step(
    psi: &Wavefunction,
    potential: &PotentialSpec,
    params: &PhysicsParams,
    dt: f64,
) -> Result<Wavefunction> {
    let scheme = if psi.grid().supports_spectral() {
        Scheme::SplitStepSpectral
    } else {
        Scheme::CrankNicolson
    };
    let mut prop = KostinPropagator::new(*psi.grid(), potential, *params, dt, scheme)?;
    let mut out = psi.clone();
    prop.step(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunction::expectation_position;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(-20.0, 20.0, 2048, true).unwrap()
    }

    #[test]
    fn relaxation_weight_limits() {
        assert_eq!(relaxation_weight(0.0, 0.3), 0.3);
        let w = relaxation_weight(1.0, 0.5);
        assert!((w - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let tiny = relaxation_weight(1e-12, 1e-3);
        assert!((tiny - 1e-3).abs() < 1e-17);
    }

    #[test]
    fn one_step_preserves_norm() {
        let g = grid();
        let v = PotentialSpec::harmonic(1.0);
        for mu in [0.0, 0.5, 1.0] {
            let params = PhysicsParams::new(1.0, 1.0, mu).unwrap();
            let psi = Wavefunction::gaussian(g, -3.0, 0.9, 1.2, 1.0).unwrap();
            let next = kostin_step(&psi, &v, &params, 1e-2).unwrap();
            assert!((next.norm() - psi.norm()).abs() < 1e-10, "mu = {mu}");
        }
    }

    #[test]
    fn ground_state_is_stationary() {
        let g = grid();
        let params = PhysicsParams::new(1.0, 1.0, 0.0).unwrap();
        let mut prop =
            KostinPropagator::new(g, &PotentialSpec::harmonic(1.0), params, 1e-2, Scheme::default())
                .unwrap();
        let mut psi = Wavefunction::gaussian(g, 0.0, 0.5f64.sqrt(), 0.0, 1.0).unwrap();
        let rho0 = psi.density();
        for _ in 0..1000 {
            prop.step(&mut psi).unwrap();
            assert!(expectation_position(&psi).abs() < 1e-6);
        }
        let drift = psi
            .density()
            .iter()
            .zip(&rho0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-4, "density drift {drift}");
    }

    #[test]
    fn scheme_grid_requirements() {
        let v = PotentialSpec::harmonic(1.0);
        let p = PhysicsParams::unit();
        let closed = SpatialGrid::new(-10.0, 10.0, 256, false).unwrap();
        let odd = SpatialGrid::new(-10.0, 10.0, 300, true).unwrap();
        assert!(KostinPropagator::new(closed, &v, p, 1e-3, Scheme::SplitStepSpectral).is_err());
        assert!(KostinPropagator::new(odd, &v, p, 1e-3, Scheme::SplitStepSpectral).is_err());
        assert!(KostinPropagator::new(grid(), &v, p, 1e-3, Scheme::CrankNicolson).is_err());
        assert!(KostinPropagator::new(closed, &v, p, 1e-3, Scheme::CrankNicolson).is_ok());
        assert!(KostinPropagator::new(grid(), &v, p, 0.0, Scheme::SplitStepSpectral).is_err());
        let classical = PhysicsParams::new(1.0, 0.0, 1.0).unwrap();
        assert!(KostinPropagator::new(grid(), &v, classical, 1e-3, Scheme::default()).is_err());
    }

    #[test]
    fn crank_nicolson_is_unitary() {
        let g = SpatialGrid::new(-15.0, 15.0, 1024, false).unwrap();
        let params = PhysicsParams::new(1.0, 1.0, 0.5).unwrap();
        let mut prop =
            KostinPropagator::new(g, &PotentialSpec::harmonic(1.0), params, 1e-2, Scheme::CrankNicolson)
                .unwrap();
        let mut psi = Wavefunction::gaussian(g, -4.0, 0.7, 0.5, 1.0).unwrap();
        for _ in 0..200 {
            prop.step(&mut psi).unwrap();
        }
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }
}
