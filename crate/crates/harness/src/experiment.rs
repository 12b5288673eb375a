//! Runs a resolved [`ExperimentConfig`] and persists its artifacts.
//!
//! | experiment | files |
//! |---|---|
//! | `learn` | `trajectory.csv` |
//! | `evolve` | `trajectory.csv` (packet centre), `density.csv`, `observables.csv`, `oracle.csv` (harmonic only) |
//! | `figure1` | `trajectory.csv` (learner), `packet.csv`, `density.csv`, `observables.csv`, `oracle.csv` |
//! | `compare` | `trajectory.csv`, `trajectory_classical.csv`, `difference.csv` |
//! | `sweep` | `sweep.csv`, one `point_NNN/` directory per value |
//!
//! Every run also writes `meta.json`; with `format = "json"` each table gets a
//! `.json` mirror next to its CSV.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use madelung_core::dynamics::{
    coherent_state, damped_oscillator_closed_form, evolve_with, PropagatorConfig, Scheme,
};
use madelung_core::hydro::{disruptor_at, disruptor_field};
use madelung_core::learner::{run_learner_with, run_momentum_gd, LearnerRun, RunOptions, RunOutcome};
use madelung_core::{DisruptorSource, FieldSampler, PhysicsParams, SpatialGrid, Wavefunction};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DisruptorKind, ExperimentConfig, ExperimentKind, InitialState, OutputFormat};
use crate::error::{ErrorReport, HarnessError, Result};
use crate::output::{
    ensure_dir, write_json, write_sweep_csv, ColumnTable, DensitySnapshot, DensityTable, SweepRow,
    TrajectoryRow, TrajectoryTable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Converged { step: usize },
    MaxSteps,
    Diverged { step: usize },
    /// Sweep points that failed; the remaining points completed.
    PartialFailure { failed: Vec<usize> },
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Diverged { .. } => 4,
            RunStatus::PartialFailure { .. } => 3,
            _ => 0,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Converged { .. } => "converged",
            RunStatus::MaxSteps => "max_steps",
            RunStatus::Diverged { .. } => "diverged",
            RunStatus::PartialFailure { .. } => "partial_failure",
        }
    }
}

impl From<RunOutcome> for RunStatus {
    fn from(o: RunOutcome) -> Self {
        match o {
            RunOutcome::Converged { step } => RunStatus::Converged { step },
            RunOutcome::MaxSteps => RunStatus::MaxSteps,
            RunOutcome::Diverged { step } => RunStatus::Diverged { step },
        }
    }
}

/// Everything `meta.json` records; with `config` alone the run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub experiment: ExperimentKind,
    pub status: RunStatus,
    pub config: ExperimentConfig,
    pub scheme: Scheme,
    pub versions: BTreeMap<String, String>,
    /// Times of the `rho_t*` columns of `density.csv`.
    pub snapshot_times: Vec<f64>,
    pub files: Vec<String>,
    /// Reserved; every experiment is deterministic.
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point_errors: Vec<PointError>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub index: usize,
    pub exit_code: i32,
    pub message: String,
}

/// In-memory results of one run, identical to what was written to disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Artifacts {
    pub trajectory: Option<TrajectoryTable>,
    pub classical: Option<TrajectoryTable>,
    pub packet: Option<TrajectoryTable>,
    pub difference: Option<ColumnTable>,
    pub density: Option<DensityTable>,
    pub observables: Option<ColumnTable>,
    pub oracle: Option<ColumnTable>,
    pub sweep: Option<Vec<SweepRow>>,
    pub points: Vec<std::result::Result<RunReport, ErrorReport>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub meta: Meta,
    pub artifacts: Artifacts,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.meta.status.exit_code()
    }
}

fn learner_table(run: &LearnerRun) -> TrajectoryTable {
    TrajectoryTable {
        step_indexed: true,
        rows: run
            .records
            .iter()
            .map(|r| TrajectoryRow {
                t: r.t as f64,
                x: r.x,
                u: r.u,
                v: r.v,
                dis: r.dis,
            })
            .collect(),
    }
}

fn read_table_state(path: &Path, grid: &SpatialGrid) -> Result<Wavefunction> {
    let bad = |msg: String| HarnessError::invalid("initial.table", msg);
    let mut reader = csv::Reader::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| HarnessError::io(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != ["x", "re", "im"] {
        return Err(bad(format!("{} must have columns x,re,im", path.display())));
    }
    let mut rows: Vec<(f64, Complex64)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| HarnessError::io(path, e))?;
        let f = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad(format!("unparsable row {:?}", rec)))
        };
        rows.push((f(0)?, Complex64::new(f(1)?, f(2)?)));
    }
    if rows.len() < 2 || rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(bad("need >= 2 rows with strictly increasing x".into()));
    }
    let values = grid
        .points()
        .map(|x| {
            let last = rows.len() - 1;
            if x < rows[0].0 || x > rows[last].0 {
                return Complex64::new(0.0, 0.0);
            }
            let j = rows.partition_point(|r| r.0 <= x).clamp(1, last) - 1;
            let w = (x - rows[j].0) / (rows[j + 1].0 - rows[j].0);
            rows[j].1 + (rows[j + 1].1 - rows[j].1) * w
        })
        .collect();
    Wavefunction::normalized(*grid, values).map_err(|e| bad(e.to_string()))
}

/// The configured initial wavefunction.
pub fn initial_wavefunction(config: &ExperimentConfig) -> Result<Wavefunction> {
    let grid = config.grid()?;
    let init = &config.initial;
    let invalid = |e: madelung_core::Error| HarnessError::invalid("initial", e.to_string());
    match init.state {
        InitialState::Gaussian => {
            let width = init.width.unwrap_or(1.0);
            let (lo, hi) = (init.x0 - 4.0 * width, init.x0 + 4.0 * width);
            if lo < grid.x_min() || hi > grid.x_max() {
                return Err(HarnessError::invalid(
                    "initial.x0",
                    format!("packet interval [{lo}, {hi}] leaves the grid"),
                ));
            }
            Wavefunction::gaussian(grid, init.x0, width, init.p0, config.physics.hbar).map_err(invalid)
        }
        InitialState::Coherent => coherent_state(&config.coherent_params()?, &grid).map_err(invalid),
        InitialState::Custom => {
            let path = init
                .table
                .as_ref()
                .ok_or_else(|| HarnessError::invalid("initial.table", "missing"))?;
            read_table_state(path, &grid)
        }
    }
}

fn disruptor_source(config: &ExperimentConfig, params: &PhysicsParams) -> Result<DisruptorSource> {
    match config.learner.disruptor {
        DisruptorKind::Zero => Ok(DisruptorSource::Zero),
        DisruptorKind::Field => {
            let psi0 = initial_wavefunction(config)?;
            let sampler = FieldSampler::new(
                psi0,
                &config.potential,
                *params,
                config.run.dt,
                config.run.substeps,
                config.run.scheme,
            )?;
            Ok(DisruptorSource::FieldSampled(Box::new(sampler)))
        }
    }
}

fn run_options(config: &ExperimentConfig) -> RunOptions {
    RunOptions {
        steps: config.run.steps,
        stop_tol: config.run.stop_tol,
        time_scale: config.physics.time_scale,
    }
}

fn learn(config: &ExperimentConfig) -> Result<LearnerRun> {
    let params = config.physics()?;
    let mut dis = disruptor_source(config, &params)?;
    let run = run_learner_with(
        config.initial.x0,
        config.initial.u0,
        &config.potential,
        &mut dis,
        &params,
        &run_options(config),
    )?;
    Ok(run)
}

struct WaveResults {
    packet: TrajectoryTable,
    density: DensityTable,
    observables: ColumnTable,
    oracle: Option<ColumnTable>,
}

fn propagate(config: &ExperimentConfig) -> Result<WaveResults> {
    let params = config.physics()?;
    let psi0 = initial_wavefunction(config)?;
    let grid = *psi0.grid();
    let pconfig = PropagatorConfig {
        dt: config.run.dt,
        scheme: config.run.scheme,
        t_final: config.run.t_final,
        snapshot_every: config.run.snapshot_every,
    };
    let m = params.m();
    let potential = &config.potential;
    let mut packet = Vec::new();
    let record = evolve_with(&psi0, potential, &params, &pconfig, |row, psi| {
        let field = disruptor_field(&grid, &psi.amplitude(), &params)?;
        packet.push(TrajectoryRow {
            t: row.t,
            x: row.x_mean,
            u: row.p_mean / m,
            v: potential.evaluate(row.x_mean),
            dis: disruptor_at(&field, row.x_mean)?,
        });
        Ok(())
    })?;

    let density = DensityTable {
        x: grid.positions(),
        snapshots: record
            .snapshots
            .iter()
            .map(|s| DensitySnapshot {
                t: s.t,
                rho: s.psi.density(),
            })
            .collect(),
    };
    let mut observables = ColumnTable::new(&["t", "x_mean", "p_mean", "norm", "s_mean"]);
    observables.rows = record
        .series
        .iter()
        .map(|r| vec![r.t, r.x_mean, r.p_mean, r.norm, r.s_mean])
        .collect();

    // the centre of any packet in a harmonic trap obeys ẍ = −(ω²/m) x − μ ẋ
    let oracle = potential.omega().map(|omega| {
        let first = &record.series[0];
        let (x0, v0) = (first.x_mean, first.p_mean / m);
        let mut table = ColumnTable::new(&["t", "x_closed", "p_closed"]);
        table.rows = record
            .series
            .iter()
            .map(|r| {
                let (x, v) = damped_oscillator_closed_form(x0, v0, params.mu(), omega / m.sqrt(), r.t);
                vec![r.t, x, m * v]
            })
            .collect();
        table
    });
    Ok(WaveResults {
        packet: TrajectoryTable {
            step_indexed: false,
            rows: packet,
        },
        density,
        observables,
        oracle,
    })
}

struct Writer<'a> {
    dir: &'a Path,
    json: bool,
    files: Vec<String>,
}

impl Writer<'_> {
    fn mirror<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<()> {
        if self.json {
            let name = format!("{stem}.json");
            write_json(value, &self.dir.join(&name))?;
            self.files.push(name);
        }
        Ok(())
    }

    fn trajectory(&mut self, stem: &str, table: &TrajectoryTable) -> Result<()> {
        let name = format!("{stem}.csv");
        table.write_csv(&self.dir.join(&name))?;
        self.files.push(name);
        self.mirror(stem, table)
    }

    fn columns(&mut self, stem: &str, table: &ColumnTable) -> Result<()> {
        let name = format!("{stem}.csv");
        table.write_csv(&self.dir.join(&name))?;
        self.files.push(name);
        self.mirror(stem, table)
    }

    fn density(&mut self, table: &DensityTable) -> Result<()> {
        table.write_csv(&self.dir.join("density.csv"))?;
        self.files.push("density.csv".into());
        self.mirror("density", table)
    }

    fn sweep(&mut self, rows: &[SweepRow]) -> Result<()> {
        write_sweep_csv(rows, &self.dir.join("sweep.csv"))?;
        self.files.push("sweep.csv".into());
        self.mirror("sweep", &rows)
    }
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("madelung-core".to_string(), madelung_core::VERSION.to_string()),
        ("madelung-harness".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ])
}

fn sweep_row(index: usize, value: f64, result: &std::result::Result<RunReport, ErrorReport>) -> SweepRow {
    let nan = f64::NAN;
    let Ok(report) = result else {
        return SweepRow {
            index,
            value,
            status: "failed".into(),
            steps: 0,
            final_x: nan,
            final_u: nan,
            final_v: nan,
        };
    };
    let a = &report.artifacts;
    let table = a.trajectory.as_ref().or(a.packet.as_ref());
    let last = table.and_then(|t| t.rows.last());
    SweepRow {
        index,
        value,
        status: report.meta.status.label().into(),
        steps: table.map_or(0, |t| t.rows.len().saturating_sub(1)),
        final_x: last.map_or(nan, |r| r.x),
        final_u: last.map_or(nan, |r| r.u),
        final_v: last.map_or(nan, |r| r.v),
    }
}

/// Runs `config` (already resolved), writing into `config.output.dir`.
///
/// Divergence is not an error: the data is written and the returned status
/// carries the nonzero exit code.
pub fn run_experiment(config: &ExperimentConfig, seed: Option<u64>) -> Result<RunReport> {
    let start = Instant::now();
    config.validate()?;
    let dir = config.output.dir.clone();
    ensure_dir(&dir)?;
    let mut out = Writer {
        dir: &dir,
        json: config.output.format == OutputFormat::Json,
        files: Vec::new(),
    };
    let mut artifacts = Artifacts::default();
    let mut snapshot_times = Vec::new();
    let mut point_errors = Vec::new();

    let status = match config.kind() {
        ExperimentKind::Learn => {
            let run = learn(config)?;
            let table = learner_table(&run);
            out.trajectory("trajectory", &table)?;
            artifacts.trajectory = Some(table);
            run.outcome.into()
        }
        ExperimentKind::Evolve => {
            let wave = propagate(config)?;
            out.trajectory("trajectory", &wave.packet)?;
            out.density(&wave.density)?;
            out.columns("observables", &wave.observables)?;
            if let Some(o) = &wave.oracle {
                out.columns("oracle", o)?;
            }
            snapshot_times = wave.density.times();
            artifacts.trajectory = Some(wave.packet);
            artifacts.density = Some(wave.density);
            artifacts.observables = Some(wave.observables);
            artifacts.oracle = wave.oracle;
            RunStatus::Completed
        }
        ExperimentKind::Figure1 => {
            let run = learn(config)?;
            let table = learner_table(&run);
            let wave = propagate(config)?;
            out.trajectory("trajectory", &table)?;
            out.trajectory("packet", &wave.packet)?;
            out.density(&wave.density)?;
            out.columns("observables", &wave.observables)?;
            if let Some(o) = &wave.oracle {
                out.columns("oracle", o)?;
            }
            snapshot_times = wave.density.times();
            artifacts.trajectory = Some(table);
            artifacts.packet = Some(wave.packet);
            artifacts.density = Some(wave.density);
            artifacts.observables = Some(wave.observables);
            artifacts.oracle = wave.oracle;
            run.outcome.into()
        }
        ExperimentKind::Compare => {
            let quantum = learn(config)?;
            let params = config.physics()?;
            let alpha = config.physics.time_scale * params.lambda();
            let classical = run_momentum_gd(
                config.initial.x0,
                config.initial.u0,
                &config.potential,
                alpha,
                params.beta(),
                &run_options(config),
            )?;
            let q = learner_table(&quantum);
            let c = learner_table(&classical);
            let mut diff = ColumnTable::new(&["t", "dx", "du"]);
            diff.rows = q
                .rows
                .iter()
                .zip(&c.rows)
                .map(|(a, b)| vec![a.t, a.x - b.x, a.u - b.u])
                .collect();
            out.trajectory("trajectory", &q)?;
            out.trajectory("trajectory_classical", &c)?;
            out.columns("difference", &diff)?;
            artifacts.trajectory = Some(q);
            artifacts.classical = Some(c);
            artifacts.difference = Some(diff);
            match (RunStatus::from(quantum.outcome), RunStatus::from(classical.outcome)) {
                (d @ RunStatus::Diverged { .. }, _) | (_, d @ RunStatus::Diverged { .. }) => d,
                (s, _) => s,
            }
        }
        ExperimentKind::Sweep => {
            let sweep = config.sweep.as_ref().expect("validated");
            let points: Vec<ExperimentConfig> = sweep
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| config.sweep_point(i, *v))
                .collect::<Result<_>>()?;
            let results: Vec<std::result::Result<RunReport, ErrorReport>> = points
                .par_iter()
                .map(|p| run_experiment(p, seed).map_err(|e| e.report()))
                .collect();
            let rows: Vec<SweepRow> = results
                .iter()
                .zip(&sweep.values)
                .enumerate()
                .map(|(i, (r, v))| sweep_row(i, *v, r))
                .collect();
            out.sweep(&rows)?;
            for (i, r) in results.iter().enumerate() {
                if let Err(e) = r {
                    point_errors.push(PointError {
                        index: i,
                        exit_code: e.exit_code,
                        message: e.message.clone(),
                    });
                }
            }
            artifacts.sweep = Some(rows);
            artifacts.points = results;
            if point_errors.is_empty() {
                RunStatus::Completed
            } else {
                RunStatus::PartialFailure {
                    failed: point_errors.iter().map(|e| e.index).collect(),
                }
            }
        }
    };

    let mut files = out.files;
    files.push("meta.json".into());
    let meta = Meta {
        experiment: config.kind(),
        status,
        config: config.clone(),
        scheme: config.run.scheme,
        versions: versions(),
        snapshot_times,
        files,
        seed,
        point_errors,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&meta, &dir.join("meta.json"))?;
    Ok(RunReport { meta, artifacts })
}

/// Best-effort `error.json` in the output directory.
pub fn write_error_report(dir: &Path, report: &ErrorReport) -> Result<()> {
    ensure_dir(dir)?;
    write_json(report, &dir.join("error.json"))
}

/// Re-reads a run directory written by [`run_experiment`].
///
/// With `json` the `.json` mirrors are read instead of the CSV files. Sweep
/// points are not descended into (`points` stays empty).
pub fn load_artifacts(dir: &Path, json: bool) -> Result<(Meta, Artifacts)> {
    use crate::output::{read_json, read_sweep_csv};

    let meta: Meta = read_json(&dir.join("meta.json"))?;
    let mut a = Artifacts::default();
    let ext = if json { ".json" } else { ".csv" };
    for name in meta.files.iter().filter(|f| f.ends_with(ext) && f.as_str() != "meta.json") {
        let path = dir.join(name);
        let stem = name.trim_end_matches(ext);
        macro_rules! load {
            ($csv:expr) => {
                if json {
                    read_json(&path)?
                } else {
                    $csv
                }
            };
        }
        match stem {
            "trajectory" => a.trajectory = Some(load!(TrajectoryTable::read_csv(&path)?)),
            "trajectory_classical" => a.classical = Some(load!(TrajectoryTable::read_csv(&path)?)),
            "packet" => a.packet = Some(load!(TrajectoryTable::read_csv(&path)?)),
            "difference" => a.difference = Some(load!(ColumnTable::read_csv(&path)?)),
            "observables" => a.observables = Some(load!(ColumnTable::read_csv(&path)?)),
            "oracle" => a.oracle = Some(load!(ColumnTable::read_csv(&path)?)),
            "density" => {
                a.density = Some(load!(DensityTable::read_csv(&path, &meta.snapshot_times)?))
            }
            "sweep" => a.sweep = Some(load!(read_sweep_csv(&path)?)),
            other => return Err(HarnessError::io(&path, format!("unrecognised artifact `{other}`"))),
        }
    }
    Ok((meta, a))
}
