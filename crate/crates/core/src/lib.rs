//! Quantum trajectories in the Madelung (hydrodynamic) picture, read as a
//! disrupted momentum gradient descent.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`wavefunction`], [`derivative`], [`params`] and [`fields`]
//!   hold the numerical substrate: a uniform 1-D grid, complex amplitudes on
//!   it, finite-difference/spectral derivatives and the polar decomposition
//!   `ψ = R e^{iS/ħ}`.
//! * [`hydro`] computes the quantum potential `Q = −(ħ²/2m) ∇²R / R` and the
//!   disruptor field `Dis = (ħ²/2m²) ∇(∇²R / R) = −∇Q / m`.
//! * [`potential`] and [`learner`] implement the heavy-ball update and its
//!   quantum counterpart `u' = βu − λ∇V(x) + Dis(x)`, `x' = x + u'`.
//! * [`dynamics`] propagates the Kostin (Schrödinger–Langevin) equation
//!   `iħ∂ψ = −(ħ²/2m)∇²ψ + Vψ + μ(S − ⟨S⟩)ψ` and carries the coherent-state
//!   oracles used to cross-check it.
//!
//! The Laplacian is the ordinary positive one, `∇² = ∂²/∂x²`.

pub mod derivative;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod grid;
pub mod hydro;
pub mod learner;
pub mod params;
pub mod potential;
pub mod wavefunction;

pub use derivative::DerivativeScheme;
pub use error::{Error, Result};
pub use fields::{
    expectation_momentum, expectation_phase, polar_decompose, polar_decompose_with,
    MadelungFields, NODE_DENSITY_FLOOR,
};
pub use grid::SpatialGrid;
pub use hydro::{disruptor_at, disruptor_field, quantum_potential, FieldKind, ScalarField};
pub use learner::{
    momentum_gd_step, quantum_learn_step, quantum_learn_step_scaled, run_learner,
    run_learner_with, run_momentum_gd, DisruptorSource, FieldSampler, LearnerRun, LearnerState,
    RunOptions, RunOutcome, StepRecord,
};
pub use params::PhysicsParams;
pub use potential::PotentialSpec;
pub use wavefunction::{expectation_position, norm, Wavefunction};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
