//! Experiment configuration: strict TOML schema, defaults and validation.
//!
//! A minimal document is just `experiment = "figure1"`; every other value has a
//! default and the resolved config (all defaults filled) is echoed into
//! `meta.json`, which can itself be passed back as a config.

use std::fmt;
use std::path::{Path, PathBuf};

use madelung_core::dynamics::{CoherentStateParams, Scheme};
use madelung_core::{PhysicsParams, PotentialSpec, SpatialGrid};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Learn,
    Evolve,
    Compare,
    Figure1,
    Sweep,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::Learn => "learn",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Figure1 => "figure1",
            ExperimentKind::Sweep => "sweep",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub periodic: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -20.0,
            x_max: 20.0,
            n: 2048,
            periodic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub m: f64,
    pub hbar: f64,
    pub mu: f64,
    /// Multiplies both `−λ∇V` and `Dis` in the learner update.
    pub time_scale: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            m: 1.0,
            hbar: 1.0,
            mu: 1.0,
            time_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Gaussian,
    Coherent,
    /// CSV table with columns `x,re,im`, interpolated onto the grid.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub state: InitialState,
    pub x0: f64,
    /// Initial learner velocity.
    pub u0: f64,
    /// Initial packet momentum.
    pub p0: f64,
    /// Density standard deviation of the Gaussian; defaults to the ground-state
    /// width `√(ħ/(2ω√m))` of a harmonic trap, else 1.
    pub width: Option<f64>,
    pub table: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            state: InitialState::Gaussian,
            x0: -5.0,
            u0: 0.0,
            p0: 0.0,
            width: None,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Learner iterations.
    pub steps: usize,
    pub stop_tol: f64,
    /// Propagator time step.
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    pub scheme: Scheme,
    /// Propagator steps per learner step for a field-sampled disruptor.
    pub substeps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            steps: 200,
            stop_tol: 1e-8,
            dt: 0.01,
            t_final: 20.0,
            snapshot_every: 100,
            scheme: Scheme::SplitStepSpectral,
            substeps: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisruptorKind {
    #[default]
    Zero,
    /// Sampled from a wavefunction propagated alongside the learner.
    Field,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerConfig {
    pub disruptor: DisruptorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    /// CSV plus a JSON mirror of every table.
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// Parameters a sweep may vary, addressed by their dotted config path.
pub const SWEEPABLE: &[&str] = &[
    "physics.m",
    "physics.hbar",
    "physics.mu",
    "physics.time_scale",
    "potential.omega",
    "initial.x0",
    "initial.u0",
    "initial.p0",
    "initial.width",
    "run.dt",
    "run.stop_tol",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Experiment run at every point.
    #[serde(default = "default_sweep_experiment")]
    pub experiment: ExperimentKind,
    pub parameter: String,
    pub values: Vec<f64>,
}

fn default_sweep_experiment() -> ExperimentKind {
    ExperimentKind::Learn
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::harmonic(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            experiment: Some(kind),
            grid: GridConfig::default(),
            physics: PhysicsConfig::default(),
            potential: default_potential(),
            initial: InitialConfig::default(),
            run: RunConfig::default(),
            learner: LearnerConfig::default(),
            output: OutputConfig::default(),
            sweep: None,
        }
    }

    /// The experiment tag; resolved configs always carry one.
    pub fn kind(&self) -> ExperimentKind {
        self.experiment.unwrap_or(ExperimentKind::Figure1)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        let g = &self.grid;
        SpatialGrid::new(g.x_min, g.x_max, g.n, g.periodic)
            .map_err(|e| HarnessError::invalid("grid", e.to_string()))
    }

    pub fn physics(&self) -> Result<PhysicsParams> {
        let p = &self.physics;
        PhysicsParams::new(p.m, p.hbar, p.mu).map_err(|e| match e {
            madelung_core::Error::InvalidParameter { name, reason } => {
                HarnessError::invalid(format!("physics.{name}"), reason)
            }
            other => HarnessError::invalid("physics", other.to_string()),
        })
    }

    pub fn coherent_params(&self) -> Result<CoherentStateParams> {
        let omega = self.potential.omega().ok_or_else(|| {
            HarnessError::invalid("initial.state", "a coherent state needs a harmonic potential")
        })?;
        Ok(CoherentStateParams {
            x_t: self.initial.x0,
            p_t: self.initial.p0,
            s_t: 0.0,
            omega,
        })
    }

    /// Fills every default that depends on other values and checks all invariants.
    pub fn resolve(mut self, kind_hint: Option<ExperimentKind>) -> Result<Self> {
        match (self.experiment, kind_hint) {
            (Some(a), Some(b)) if a != b => {
                return Err(HarnessError::invalid(
                    "experiment",
                    format!("config says `{a}` but the command is `{b}`"),
                ))
            }
            (None, Some(b)) => self.experiment = Some(b),
            (None, None) => {
                return Err(HarnessError::invalid("experiment", "missing experiment tag"))
            }
            _ => {}
        }
        if self.initial.width.is_none() {
            let width = match self.potential.omega() {
                Some(omega) if omega > 0.0 && self.physics.m > 0.0 && self.physics.hbar > 0.0 => {
                    (self.physics.hbar / (2.0 * omega * self.physics.m.sqrt())).sqrt()
                }
                _ => 1.0,
            };
            self.initial.width = Some(width);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind();
        let grid = self.grid()?;
        self.physics()?;
        self.potential.validate().map_err(|e| match e {
            madelung_core::Error::InvalidParameter { name, reason } => {
                HarnessError::invalid(format!("potential.{name}"), reason)
            }
            other => HarnessError::invalid("potential", other.to_string()),
        })?;

        let ts = self.physics.time_scale;
        if !(ts > 0.0) || !ts.is_finite() {
            return Err(HarnessError::invalid("physics.time_scale", format!("must be positive, got {ts}")));
        }
        let init = &self.initial;
        for (name, v) in [("initial.x0", init.x0), ("initial.u0", init.u0), ("initial.p0", init.p0)] {
            if !v.is_finite() {
                return Err(HarnessError::invalid(name, "must be finite"));
            }
        }
        if let Some(w) = init.width {
            if !(w > 0.0) || !w.is_finite() {
                return Err(HarnessError::invalid("initial.width", format!("must be positive, got {w}")));
            }
        }
        match (init.state, &init.table) {
            (InitialState::Custom, None) => {
                return Err(HarnessError::invalid("initial.table", "a custom state needs a table path"))
            }
            (InitialState::Coherent, _) => {
                self.coherent_params()?;
            }
            _ => {}
        }

        let run = &self.run;
        if run.steps == 0 {
            return Err(HarnessError::invalid("run.steps", "must be at least 1"));
        }
        if !(run.stop_tol >= 0.0) || !run.stop_tol.is_finite() {
            return Err(HarnessError::invalid("run.stop_tol", "must be finite and >= 0"));
        }
        if !(run.dt > 0.0) || !run.dt.is_finite() {
            return Err(HarnessError::invalid("run.dt", format!("must be positive, got {}", run.dt)));
        }
        if !(run.t_final >= 0.0) || !run.t_final.is_finite() {
            return Err(HarnessError::invalid("run.t_final", "must be finite and >= 0"));
        }
        if run.snapshot_every == 0 {
            return Err(HarnessError::invalid("run.snapshot_every", "must be at least 1"));
        }
        if run.substeps == 0 {
            return Err(HarnessError::invalid("run.substeps", "must be at least 1"));
        }
        let wave_needed = matches!(kind, ExperimentKind::Evolve | ExperimentKind::Figure1)
            || self.learner.disruptor == DisruptorKind::Field;
        if wave_needed {
            match run.scheme {
                Scheme::SplitStepSpectral if !grid.supports_spectral() => {
                    return Err(HarnessError::invalid(
                        "run.scheme",
                        "split_step_spectral needs a periodic grid with a power-of-two n",
                    ))
                }
                Scheme::CrankNicolson if grid.is_periodic() => {
                    return Err(HarnessError::invalid(
                        "run.scheme",
                        "crank_nicolson runs on closed grids (grid.periodic = false)",
                    ))
                }
                _ => {}
            }
            if self.learner.disruptor == DisruptorKind::Field && !(self.physics.hbar >= 0.0) {
                return Err(HarnessError::invalid("physics.hbar", "must be >= 0"));
            }
        }

        match (kind, &self.sweep) {
            (ExperimentKind::Sweep, None) => {
                return Err(HarnessError::invalid("sweep", "sweep experiment needs a [sweep] section"))
            }
            (ExperimentKind::Sweep, Some(s)) => {
                if s.experiment == ExperimentKind::Sweep {
                    return Err(HarnessError::invalid("sweep.experiment", "sweeps do not nest"));
                }
                if !SWEEPABLE.contains(&s.parameter.as_str()) {
                    return Err(HarnessError::invalid(
                        "sweep.parameter",
                        format!("`{}` is not sweepable; choose one of {}", s.parameter, SWEEPABLE.join(", ")),
                    ));
                }
                if s.values.is_empty() {
                    return Err(HarnessError::invalid("sweep.values", "need at least one value"));
                }
                for (i, v) in s.values.iter().enumerate() {
                    self.sweep_point(i, *v)?;
                }
            }
            (_, Some(_)) => {
                return Err(HarnessError::invalid("sweep", "only the sweep experiment takes a [sweep] section"))
            }
            _ => {}
        }
        Ok(())
    }

    /// Config of sweep point `index`: the base experiment with one value replaced.
    pub fn sweep_point(&self, index: usize, value: f64) -> Result<Self> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| HarnessError::invalid("sweep", "no sweep section"))?;
        let mut point = self.clone();
        point.sweep = None;
        point.experiment = Some(sweep.experiment);
        point.output.dir = self.output.dir.join(format!("point_{index:03}"));
        match sweep.parameter.as_str() {
            "physics.m" => point.physics.m = value,
            "physics.hbar" => point.physics.hbar = value,
            "physics.mu" => point.physics.mu = value,
            "physics.time_scale" => point.physics.time_scale = value,
            "potential.omega" => match &mut point.potential {
                PotentialSpec::Harmonic { omega } => *omega = value,
                _ => {
                    return Err(HarnessError::invalid(
                        "sweep.parameter",
                        "potential.omega needs a harmonic potential",
                    ))
                }
            },
            "initial.x0" => point.initial.x0 = value,
            "initial.u0" => point.initial.u0 = value,
            "initial.p0" => point.initial.p0 = value,
            "initial.width" => point.initial.width = Some(value),
            "run.dt" => point.run.dt = value,
            "run.stop_tol" => point.run.stop_tol = value,
            other => {
                return Err(HarnessError::invalid("sweep.parameter", format!("`{other}` is not sweepable")))
            }
        }
        point.validate().map_err(|e| match e {
            HarnessError::Config { kind, field, message } => HarnessError::Config {
                kind,
                field,
                message: format!("sweep point {index} ({} = {value}): {message}", sweep.parameter),
            },
            other => other,
        })?;
        Ok(point)
    }
}

fn classify_deserialize_error(message: String) -> HarnessError {
    if message.contains("unknown field") || message.contains("unknown variant") {
        let field = message
            .split('`')
            .nth(1)
            .map(str::to_string);
        if message.contains("unknown field") {
            return HarnessError::unknown_key(field, message);
        }
    }
    HarnessError::Config {
        kind: crate::error::ConfigErrorKind::Invalid,
        field: None,
        message,
    }
}

/// Parses and validates a TOML config document.
///
/// `kind_hint` is the experiment implied by the command line; a conflicting
/// tag in the document is an error.
pub fn parse_config(text: &str, kind_hint: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| HarnessError::syntax(e.message().to_string()))?;
    let config: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| classify_deserialize_error(e.message().to_string()))?;
    config.resolve(kind_hint)
}

/// Parses a JSON config, or a `meta.json` written by a previous run (its `config` member).
pub fn parse_config_json(text: &str, kind_hint: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| HarnessError::syntax(e.to_string()))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    let config: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| classify_deserialize_error(e.to_string()))?;
    config.resolve(kind_hint)
}

/// Loads a config file; `.json` files go through [`parse_config_json`], anything else is TOML.
pub fn load_config(path: &Path, kind_hint: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        parse_config_json(&text, kind_hint)
    } else {
        parse_config(&text, kind_hint)
    }
}
