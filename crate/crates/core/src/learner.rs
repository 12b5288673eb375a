//! Discrete learning dynamics.
//!
//! Classical heavy ball:
//!
//! ```text
//! u_t     = β u_{t−1} − α ∇f(x_t)
//! x_{t+1} = x_t + u_t
//! ```
//!
//! Quantum learner: the same recurrence with `α = λ = 1/m`, `β = 1 − μ` and an
//! additive disruptor `Dis_t(x_t)`. The velocity is always computed from the
//! gradient at the current position, then the position moves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::derivative::DerivativeScheme;
use crate::dynamics::{KostinPropagator, Scheme};
use crate::error::{Error, Result};
use crate::hydro::{disruptor_at, disruptor_field_with, ScalarField};
use crate::params::PhysicsParams;
use crate::potential::PotentialSpec;
use crate::wavefunction::Wavefunction;

/// Positions beyond this magnitude end a run as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub t: usize,
    pub x: f64,
    pub u: f64,
    /// Disruptor value applied on the step that produced this state.
    pub dis_last: f64,
}

impl LearnerState {
    pub fn new(x: f64, u: f64) -> Self {
        Self {
            t: 0,
            x,
            u,
            dis_last: 0.0,
        }
    }
}

/// Samples `Dis_t` from a wavefunction propagated alongside the learner.
pub struct FieldSampler {
    /// `None` in the classical limit ħ = 0, where the disruptor is identically zero.
    propagator: Option<KostinPropagator>,
    psi: Wavefunction,
    params: PhysicsParams,
    substeps: usize,
    scheme: DerivativeScheme,
    last_field: Option<ScalarField>,
}

impl FieldSampler {
    /// `substeps` propagator steps of size `dt` make one learner step.
    pub fn new(
        psi0: Wavefunction,
        potential: &PotentialSpec,
        params: PhysicsParams,
        dt: f64,
        substeps: usize,
        scheme: Scheme,
    ) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::param("substeps", "must be at least 1"));
        }
        let propagator = if params.hbar() > 0.0 {
            Some(KostinPropagator::new(*psi0.grid(), potential, params, dt, scheme)?)
        } else {
            None
        };
        Ok(Self {
            propagator,
            psi: psi0,
            params,
            substeps,
            scheme: DerivativeScheme::CentralDifference,
            last_field: None,
        })
    }

    pub fn with_derivative_scheme(mut self, scheme: DerivativeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn wavefunction(&self) -> &Wavefunction {
        &self.psi
    }

    pub fn last_field(&self) -> Option<&ScalarField> {
        self.last_field.as_ref()
    }

    /// Advances the wavefunction one macro-step, then evaluates `Dis` at `x`.
    pub fn advance_and_sample(&mut self, x: f64) -> Result<f64> {
        let grid = *self.psi.grid();
        if !grid.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                min: grid.x_min(),
                max: grid.x_max(),
            });
        }
        let Some(prop) = self.propagator.as_mut() else {
            return Ok(0.0);
        };
        for _ in 0..self.substeps {
            prop.step(&mut self.psi)?;
        }
        let field = disruptor_field_with(&grid, &self.psi.amplitude(), &self.params, self.scheme)?;
        let value = disruptor_at(&field, x)?;
        self.last_field = Some(field);
        Ok(value)
    }
}

pub type DisruptorCallback = Box<dyn FnMut(usize, f64) -> std::result::Result<f64, String> + Send>;

/// Where the quantum disruptor term comes from.
pub enum DisruptorSource {
    /// Identically zero (the coherent-state case).
    Zero,
    FieldSampled(Box<FieldSampler>),
    /// `(step, x) ↦ Dis`.
    Callback(DisruptorCallback),
}

impl fmt::Debug for DisruptorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisruptorSource::Zero => f.write_str("Zero"),
            DisruptorSource::FieldSampled(_) => f.write_str("FieldSampled(..)"),
            DisruptorSource::Callback(_) => f.write_str("Callback(..)"),
        }
    }
}

impl DisruptorSource {
    pub fn is_zero(&self) -> bool {
        matches!(self, DisruptorSource::Zero)
    }

    fn value(&mut self, t: usize, x: f64) -> Result<f64> {
        match self {
            DisruptorSource::Zero => Ok(0.0),
            DisruptorSource::FieldSampled(sampler) => sampler.advance_and_sample(x),
            DisruptorSource::Callback(f) => f(t, x).map_err(Error::Callback),
        }
    }
}

fn check_rates(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", format!("must lie in [0, 1], got {beta}")));
    }
    Ok(())
}

fn checked_gradient(objective: &PotentialSpec, state: &LearnerState) -> Result<f64> {
    let g = objective.gradient(state.x);
    if !g.is_finite() {
        return Err(Error::NonFiniteGradient {
            step: state.t,
            x: state.x,
            gradient: g,
        });
    }
    Ok(g)
}

/// One heavy-ball step: `u' = βu − α∇f(x)`, `x' = x + u'`.
pub fn momentum_gd_step(
    state: &LearnerState,
    objective: &PotentialSpec,
    alpha: f64,
    beta: f64,
) -> Result<LearnerState> {
    check_rates(alpha, beta)?;
    let g = checked_gradient(objective, state)?;
    let u = beta * state.u - alpha * g;
    Ok(LearnerState {
        t: state.t + 1,
        x: state.x + u,
        u,
        dis_last: 0.0,
    })
}

/// One quantum learning step with unit time scale.
pub fn quantum_learn_step(
    state: &LearnerState,
    potential: &PotentialSpec,
    dis: &mut DisruptorSource,
    params: &PhysicsParams,
) -> Result<LearnerState> {
    quantum_learn_step_scaled(state, potential, dis, params, 1.0)
}

/// `u' = βu − h λ ∇V(x) + h Dis_t(x)`, `x' = x + u'`.
///
/// The time scale `h` multiplies both force terms; `β` stays `1 − μ`. With a
/// zero source this is [`momentum_gd_step`] with `α = hλ`, evaluated on the
/// same arithmetic path.
pub fn quantum_learn_step_scaled(
    state: &LearnerState,
    potential: &PotentialSpec,
    dis: &mut DisruptorSource,
    params: &PhysicsParams,
    time_scale: f64,
) -> Result<LearnerState> {
    if !(time_scale > 0.0) || !time_scale.is_finite() {
        return Err(Error::param(
            "time_scale",
            format!("must be positive, got {time_scale}"),
        ));
    }
    let alpha = time_scale * params.lambda();
    let beta = params.beta();
    check_rates(alpha, beta)?;
    let g = checked_gradient(potential, state)?;
    let d = dis.value(state.t, state.x)?;
    let mut u = beta * state.u - alpha * g;
    if d != 0.0 {
        u += time_scale * d;
    }
    Ok(LearnerState {
        t: state.t + 1,
        x: state.x + u,
        u,
        dis_last: d,
    })
}

/// One row of a learner trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: f64,
    pub u: f64,
    /// `V(x_t)`
    pub v: f64,
    pub dis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    /// `|∇V(x)| < tol` and `|u| < tol` after `step`.
    Converged { step: usize },
    /// Step budget exhausted.
    MaxSteps,
    /// `|x|` exceeded [`DIVERGENCE_BOUND`] (or became non-finite) at `step`.
    Diverged { step: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerRun {
    /// Initial state at `t = 0` followed by one row per step taken.
    pub records: Vec<StepRecord>,
    pub outcome: RunOutcome,
}

impl LearnerRun {
    pub fn final_record(&self) -> &StepRecord {
        self.records.last().expect("a run records its initial state")
    }

    pub fn steps_taken(&self) -> usize {
        self.records.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub steps: usize,
    pub stop_tol: f64,
    pub time_scale: f64,
}

impl RunOptions {
    pub fn new(steps: usize, stop_tol: f64) -> Self {
        Self {
            steps,
            stop_tol,
            time_scale: 1.0,
        }
    }
}

fn drive(
    x0: f64,
    u0: f64,
    potential: &PotentialSpec,
    options: &RunOptions,
    mut step: impl FnMut(&LearnerState) -> Result<LearnerState>,
) -> Result<LearnerRun> {
    if options.steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    if !(options.stop_tol >= 0.0) {
        return Err(Error::param("stop_tol", "must be >= 0"));
    }
    if !x0.is_finite() || !u0.is_finite() {
        return Err(Error::param("x0", "initial state must be finite"));
    }
    let record = |s: &LearnerState| StepRecord {
        t: s.t,
        x: s.x,
        u: s.u,
        v: potential.evaluate(s.x),
        dis: s.dis_last,
    };
    let mut state = LearnerState::new(x0, u0);
    let mut records = Vec::with_capacity(options.steps + 1);
    records.push(record(&state));
    let mut outcome = RunOutcome::MaxSteps;
    for _ in 0..options.steps {
        state = step(&state)?;
        records.push(record(&state));
        if !state.x.is_finite() || state.x.abs() > DIVERGENCE_BOUND {
            outcome = RunOutcome::Diverged { step: state.t };
            break;
        }
        let g = potential.gradient(state.x);
        if g.abs() < options.stop_tol && state.u.abs() < options.stop_tol {
            outcome = RunOutcome::Converged { step: state.t };
            break;
        }
    }
    Ok(LearnerRun { records, outcome })
}

/// Iterates the quantum learner from `(x0, u0)`.
#[allow(clippy::too_many_arguments)]
pub fn run_learner(
    x0: f64,
    u0: f64,
    potential: &PotentialSpec,
    dis: &mut DisruptorSource,
    params: &PhysicsParams,
    steps: usize,
    stop_tol: f64,
) -> Result<LearnerRun> {
    run_learner_with(x0, u0, potential, dis, params, &RunOptions::new(steps, stop_tol))
}

pub fn run_learner_with(
    x0: f64,
    u0: f64,
    potential: &PotentialSpec,
    dis: &mut DisruptorSource,
    params: &PhysicsParams,
    options: &RunOptions,
) -> Result<LearnerRun> {
    drive(x0, u0, potential, options, |s| {
        quantum_learn_step_scaled(s, potential, dis, params, options.time_scale)
    })
}

/// Iterates the classical heavy-ball recurrence.
pub fn run_momentum_gd(
    x0: f64,
    u0: f64,
    objective: &PotentialSpec,
    alpha: f64,
    beta: f64,
    options: &RunOptions,
) -> Result<LearnerRun> {
    check_rates(alpha, beta)?;
    drive(x0, u0, objective, options, |s| {
        momentum_gd_step(s, objective, alpha, beta)
    })
}
