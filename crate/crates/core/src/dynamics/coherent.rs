//! Fixed-width coherent states in a harmonic trap and the damped-oscillator
//! oracles for their centre.
//!
//! For `ψ = (ω/π)^{1/4} exp(−(ω/2)(x − x_t)² + i p_t (x − x_t) + i s_t)` the
//! curvature ratio `∇²R/R = ω²(x − x_t)² − ω` has zero slope at `x_t`, so the
//! quantum force vanishes on the trajectory and the centre obeys
//!
//! ```text
//! dx/dt = p / m,   dp/dt = −ω² x − μ p,   ds/dt = p²/2 − ω² x²/2 − ω/2
//! ```
//!
//! The phase equation assumes `ħ = m = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::params::PhysicsParams;
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateParams {
    pub x_t: f64,
    pub p_t: f64,
    pub s_t: f64,
    pub omega: f64,
}

impl CoherentStateParams {
    pub fn at_rest(x_t: f64, omega: f64) -> Self {
        Self {
            x_t,
            p_t: 0.0,
            s_t: 0.0,
            omega,
        }
    }

    /// Standard deviation of the density, `1/√(2ω)`.
    pub fn density_width(&self) -> f64 {
        (0.5 / self.omega).sqrt()
    }
}

/// Samples the coherent state on `grid` and renormalizes it there.
///
/// The grid must cover `x_t ± 4σ`, i.e. eight density standard deviations.
pub fn coherent_state(cp: &CoherentStateParams, grid: &SpatialGrid) -> Result<Wavefunction> {
    let omega = cp.omega;
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::param("omega", format!("must be positive, got {omega}")));
    }
    let half_span = 4.0 * cp.density_width();
    let (lo, hi) = (cp.x_t - half_span, cp.x_t + half_span);
    if lo < grid.x_min() || hi > grid.x_max() {
        return Err(Error::GridTooNarrow {
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            lo,
            hi,
        });
    }
    let amp = (omega / std::f64::consts::PI).powf(0.25);
    let psi = Wavefunction::from_fn(*grid, |x| {
        let d = x - cp.x_t;
        Complex64::from_polar(amp * (-0.5 * omega * d * d).exp(), cp.p_t * d + cp.s_t)
    });
    Wavefunction::normalized(*grid, psi.into_values())
}

fn ode_rhs(state: [f64; 3], omega: f64, m: f64, mu: f64) -> [f64; 3] {
    let [x, p, _] = state;
    let w2 = omega * omega;
    [
        p / m,
        -w2 * x - mu * p,
        0.5 * p * p / m - 0.5 * w2 * x * x - 0.5 * omega,
    ]
}

/// One classical RK4 step of the centre/momentum/phase equations.
pub fn coherent_ode_step(
    cp: &CoherentStateParams,
    params: &PhysicsParams,
    dt: f64,
) -> CoherentStateParams {
    let (w, m, mu) = (cp.omega, params.m(), params.mu());
    let y = [cp.x_t, cp.p_t, cp.s_t];
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let k1 = ode_rhs(y, w, m, mu);
    let k2 = ode_rhs(add(y, k1, 0.5 * dt), w, m, mu);
    let k3 = ode_rhs(add(y, k2, 0.5 * dt), w, m, mu);
    let k4 = ode_rhs(add(y, k3, dt), w, m, mu);
    let next: Vec<f64> = (0..3)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    CoherentStateParams {
        x_t: next[0],
        p_t: next[1],
        s_t: next[2],
        omega: w,
    }
}

/// Integrates [`coherent_ode_step`] for `steps` steps of size `dt`.
pub fn integrate_coherent_ode(
    cp: &CoherentStateParams,
    params: &PhysicsParams,
    dt: f64,
    steps: usize,
) -> CoherentStateParams {
    (0..steps).fold(*cp, |c, _| coherent_ode_step(&c, params, dt))
}

/// `(cos at, sin(at)/a)` with `a = √a2`; hyperbolic for `a2 < 0`, smooth through 0.
fn sinc_like(a2: f64, t: f64) -> (f64, f64) {
    let z2 = a2 * t * t;
    if z2.abs() < 1e-6 {
        let c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0;
        let s = t * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
        return (c, s);
    }
    if a2 > 0.0 {
        let a = a2.sqrt();
        ((a * t).cos(), (a * t).sin() / a)
    } else {
        let k = (-a2).sqrt();
        ((k * t).cosh(), (k * t).sinh() / k)
    }
}

/// Exact solution of `ẋ = p`, `ṗ = −ω² x − μ p`.
///
/// All three regimes of `r² + μ r + ω² = 0` (complex, repeated, real roots)
/// go through one formula with `γ = μ/2` and `Ω² = ω² − γ²`:
///
/// ```text
/// x(t) = e^{−γt} [x₀ C + (p₀ + γ x₀) S]
/// p(t) = e^{−γt} [p₀ C − (ω² x₀ + γ p₀) S]
/// ```
///
/// with `C = cos Ωt`, `S = sin(Ωt)/Ω` (hyperbolic when `Ω² < 0`, `S = t` at `Ω = 0`).
pub fn damped_oscillator_closed_form(x0: f64, p0: f64, mu: f64, omega: f64, t: f64) -> (f64, f64) {
    if t == 0.0 {
        return (x0, p0);
    }
    let gamma = 0.5 * mu;
    let w2 = omega * omega;
    let (c, s) = sinc_like(w2 - gamma * gamma, t);
    let decay = (-gamma * t).exp();
    (
        decay * (x0 * c + (p0 + gamma * x0) * s),
        decay * (p0 * c - (w2 * x0 + gamma * p0) * s),
    )
}
