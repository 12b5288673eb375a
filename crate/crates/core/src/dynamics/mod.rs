//! Time evolution of the open (dissipative) system and its analytic oracles.

mod coherent;
mod kostin;

pub use coherent::{
    coherent_ode_step, coherent_state, damped_oscillator_closed_form, integrate_coherent_ode,
    CoherentStateParams,
};
pub use kostin::{kostin_step, KostinPropagator, Scheme};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::polar_decompose;
use crate::grid::SpatialGrid;
use crate::params::PhysicsParams;
use crate::potential::PotentialSpec;
use crate::wavefunction::{expectation_position, norm, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_final: f64,
    pub snapshot_every: usize,
}

impl PropagatorConfig {
    pub fn validate(&self, grid: &SpatialGrid) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::param(
                "t_final",
                format!("must be finite and >= 0, got {}", self.t_final),
            ));
        }
        if self.snapshot_every == 0 {
            return Err(Error::param("snapshot_every", "must be at least 1"));
        }
        if self.scheme == Scheme::SplitStepSpectral && !grid.supports_spectral() {
            return Err(Error::InvalidGrid(
                "split-step propagation needs a periodic grid with a power-of-two size".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_final`.
    pub fn steps(&self) -> usize {
        let ratio = self.t_final / self.dt;
        // tolerate round-off in t_final/dt
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
    }
}

/// Observables of the state after `step` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub step: usize,
    pub t: f64,
    pub x_mean: f64,
    pub p_mean: f64,
    pub norm: f64,
    pub s_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub psi: Wavefunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub config: PropagatorConfig,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<ObservableRow>,
}

impl EvolutionRecord {
    pub fn final_state(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn final_observables(&self) -> &ObservableRow {
        self.series.last().expect("series holds at least the initial row")
    }
}

fn observe(psi: &Wavefunction, params: &PhysicsParams, step: usize, t: f64) -> Result<ObservableRow> {
    let fields = polar_decompose(psi, params)?;
    Ok(ObservableRow {
        step,
        t,
        x_mean: expectation_position(psi),
        p_mean: fields.mean_momentum(),
        norm: norm(psi),
        s_mean: fields.mean_phase(),
    })
}

/// Propagates `psi0` to `config.t_final`, recording observables every step and
/// the wavefunction every `snapshot_every` steps (step 0 included).
pub fn evolve(
    psi0: &Wavefunction,
    potential: &PotentialSpec,
    params: &PhysicsParams,
    config: &PropagatorConfig,
) -> Result<EvolutionRecord> {
    evolve_with(psi0, potential, params, config, |_, _| Ok(()))
}

/// [`evolve`] with `observer` called on the state after every step, step 0 included.
pub fn evolve_with(
    psi0: &Wavefunction,
    potential: &PotentialSpec,
    params: &PhysicsParams,
    config: &PropagatorConfig,
    mut observer: impl FnMut(&ObservableRow, &Wavefunction) -> Result<()>,
) -> Result<EvolutionRecord> {
    config.validate(psi0.grid())?;
    let mut prop = KostinPropagator::new(*psi0.grid(), potential, *params, config.dt, config.scheme)?;
    let steps = config.steps();
    let mut psi = psi0.clone();
    let fail = |step: usize| move |e: Error| Error::StepFailed {
        step,
        source: Box::new(e),
    };

    let mut series = Vec::with_capacity(steps + 1);
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        psi: psi.clone(),
    }];
    let row = observe(&psi, params, 0, 0.0).map_err(fail(0))?;
    observer(&row, &psi).map_err(fail(0))?;
    series.push(row);
    for step in 1..=steps {
        prop.step(&mut psi).map_err(fail(step))?;
        let t = step as f64 * config.dt;
        let row = observe(&psi, params, step, t).map_err(fail(step))?;
        observer(&row, &psi).map_err(fail(step))?;
        series.push(row);
        if step % config.snapshot_every == 0 {
            snapshots.push(Snapshot {
                step,
                t,
                psi: psi.clone(),
            });
        }
    }
    Ok(EvolutionRecord {
        config: *config,
        snapshots,
        series,
    })
}
