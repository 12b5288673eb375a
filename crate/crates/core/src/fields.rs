//! Polar (Madelung) decomposition `ψ = R e^{iS/ħ}` and hydrodynamic observables.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::derivative::{gradient_fd, spectral_complex, DerivativeScheme};
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::params::PhysicsParams;
use crate::wavefunction::{argmax, Wavefunction};

/// Density floor below which the phase of `ψ` is treated as undefined.
pub const NODE_DENSITY_FLOOR: f64 = 1e-12;

/// Amplitude, phase-action, density, flow velocity and momentum on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MadelungFields {
    pub grid: SpatialGrid,
    pub mass: f64,
    pub hbar: f64,
    /// `R_j = |ψ_j|`
    pub r: Vec<f64>,
    /// Unwrapped `S_j = ħ arg ψ_j`, zero at the density maximum.
    pub s: Vec<f64>,
    /// `ρ_j = R_j²`
    pub rho: Vec<f64>,
    /// `u = ∇S / m`
    pub u: Vec<f64>,
    /// `p = m u`
    pub p: Vec<f64>,
    /// Points whose density fell below [`NODE_DENSITY_FLOOR`].
    pub below_floor: usize,
}

impl MadelungFields {
    /// Rebuilds `R e^{iS/ħ}`.
    pub fn recompose(&self) -> Wavefunction {
        let values = self
            .r
            .iter()
            .zip(&self.s)
            .map(|(&r, &s)| Complex64::from_polar(r, s / self.hbar))
            .collect();
        Wavefunction::from_values(self.grid, values).expect("fields share the grid length")
    }

    /// `⟨p⟩ = ∑ p_j ρ_j dx`.
    pub fn mean_momentum(&self) -> f64 {
        weighted_sum(&self.p, &self.rho) * self.grid.dx()
    }

    /// `⟨S⟩ = ∑ S_j ρ_j dx`.
    pub fn mean_phase(&self) -> f64 {
        weighted_sum(&self.s, &self.rho) * self.grid.dx()
    }

    pub fn is_valid(&self, j: usize) -> bool {
        self.rho[j] >= NODE_DENSITY_FLOOR
    }
}

pub(crate) fn weighted_sum(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Wraps an angle into `(−π, π]`.
#[inline]
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Unwrapped phase of `ψ` in radians together with the number of points
/// below the density floor.
///
/// Unwrapping runs left to right over the points above the floor; points
/// below it take the phase of the nearest valid neighbour (the left one on
/// ties). The additive constant puts zero at the density maximum.
///
/// Only sub-floor points lying between the first and last valid point count
/// as nodes. Vanishing tails outside the support are vacuum, not nodes; the
/// input is rejected when nodes make up more than half of the support.
pub(crate) fn unwrapped_phase(psi: &Wavefunction, rho: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = psi.len();
    let valid: Vec<bool> = rho.iter().map(|&r| r >= NODE_DENSITY_FLOOR).collect();
    let below = valid.iter().filter(|v| !**v).count();
    let (first, last) = match (valid.iter().position(|v| *v), valid.iter().rposition(|v| *v)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::NodeDominated {
                below: n,
                considered: n,
            })
        }
    };
    let span = last - first + 1;
    let interior_nodes = valid[first..=last].iter().filter(|v| !**v).count();
    if 2 * interior_nodes > span {
        return Err(Error::NodeDominated {
            below: interior_nodes,
            considered: span,
        });
    }

    let psi = psi.values();
    let mut phase = vec![0.0; n];
    let mut prev: Option<usize> = None;
    for j in first..=last {
        if !valid[j] {
            continue;
        }
        let theta = psi[j].arg();
        let value = match prev {
            None => theta,
            Some(i) => phase[i] + wrap_angle(theta - psi[i].arg()),
        };
        phase[j] = value;
        if let Some(i) = prev {
            // fill the gap (i, j) from the nearer end
            for k in i + 1..j {
                phase[k] = if k - i <= j - k { phase[i] } else { value };
            }
        }
        prev = Some(j);
    }
    for k in 0..first {
        phase[k] = phase[first];
    }
    for k in last + 1..n {
        phase[k] = phase[last];
    }

    let anchor = phase[argmax(rho.iter().copied())];
    phase.iter_mut().for_each(|v| *v -= anchor);
    Ok((phase, below))
}

/// Polar decomposition with central-difference phase gradients.
pub fn polar_decompose(psi: &Wavefunction, params: &PhysicsParams) -> Result<MadelungFields> {
    polar_decompose_with(psi, params, DerivativeScheme::CentralDifference)
}

/// Polar decomposition with an explicit derivative scheme for `u = ∇S/m`.
///
/// Central differences act on phase differences wrapped into `(−π, π]`, so a
/// periodic grid's wrap-around seam is handled. The spectral variant uses the
/// current-density form `u = ħ Im(ψ* ∂ψ) / (m ρ)` on points above the floor
/// and sets `u = 0` elsewhere.
pub fn polar_decompose_with(
    psi: &Wavefunction,
    params: &PhysicsParams,
    scheme: DerivativeScheme,
) -> Result<MadelungFields> {
    let hbar = params.hbar();
    if !(hbar > 0.0) {
        return Err(Error::param(
            "hbar",
            "the phase S = ħ arg ψ is undefined for ħ = 0",
        ));
    }
    let grid = *psi.grid();
    scheme.check(&grid)?;
    let m = params.m();
    let r = psi.amplitude();
    let rho: Vec<f64> = r.iter().map(|v| v * v).collect();
    let (phase, below_floor) = unwrapped_phase(psi, &rho)?;

    let u: Vec<f64> = match scheme {
        DerivativeScheme::CentralDifference => gradient_fd(&grid, &phase, |a, b| wrap_angle(a - b))
            .into_iter()
            .map(|k| hbar * k / m)
            .collect(),
        DerivativeScheme::Spectral => {
            let dpsi = spectral_complex(&grid, psi.values(), 1);
            psi.values()
                .iter()
                .zip(&dpsi)
                .zip(&rho)
                .map(|((z, dz), &d)| {
                    if d >= NODE_DENSITY_FLOOR {
                        hbar * (z.conj() * dz).im / (m * d)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    let p = u.iter().map(|v| m * v).collect();
    let s = phase.into_iter().map(|v| hbar * v).collect();
    Ok(MadelungFields {
        grid,
        mass: m,
        hbar,
        r,
        s,
        rho,
        u,
        p,
        below_floor,
    })
}

/// Hydrodynamic `⟨p⟩ = ∑ p_j ρ_j dx`.
pub fn expectation_momentum(psi: &Wavefunction, params: &PhysicsParams) -> Result<f64> {
    Ok(polar_decompose(psi, params)?.mean_momentum())
}

/// `⟨S⟩ = ∑ S_j ρ_j dx`.
pub fn expectation_phase(fields: &MadelungFields) -> f64 {
    fields.mean_phase()
}
