use serde::Serialize;

use crate::error::{Error, Result};

/// Mass, reduced Planck constant and friction of the single particle.
///
/// `β = 1 − μ` and `λ = 1/m` are derived on every call and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicsParams {
    m: f64,
    hbar: f64,
    mu: f64,
}

impl PhysicsParams {
    pub fn new(m: f64, hbar: f64, mu: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::param("m", format!("mass must be positive and finite, got {m}")));
        }
        if !(hbar >= 0.0) || !hbar.is_finite() {
            return Err(Error::param("hbar", format!("must be finite and >= 0, got {hbar}")));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::param("mu", format!("friction must lie in [0, 1], got {mu}")));
        }
        Ok(Self { m, hbar, mu })
    }

    /// `m = ħ = μ = 1`.
    pub fn unit() -> Self {
        Self {
            m: 1.0,
            hbar: 1.0,
            mu: 1.0,
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Momentum retention factor `1 − μ`.
    pub fn beta(&self) -> f64 {
        1.0 - self.mu
    }

    /// Learning rate `1/m`.
    pub fn lambda(&self) -> f64 {
        1.0 / self.m
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(self.m, hbar, self.mu)
    }

    pub fn with_mass(self, m: f64) -> Result<Self> {
        Self::new(m, self.hbar, self.mu)
    }

    pub fn with_friction(self, mu: f64) -> Result<Self> {
        Self::new(self.m, self.hbar, mu)
    }
}
