//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always printed:
//! `cargo test -p madelung-harness --test acceptance`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use madelung_core::dynamics::{
    coherent_state, damped_oscillator_closed_form, evolve, CoherentStateParams, KostinPropagator,
    PropagatorConfig, Scheme,
};
use madelung_core::hydro::{disruptor_at, disruptor_field, quantum_potential};
use madelung_core::learner::{momentum_gd_step, quantum_learn_step, run_learner, LearnerState};
use madelung_core::{
    norm, DisruptorSource, PhysicsParams, PotentialSpec, SpatialGrid, NODE_DENSITY_FLOOR,
};
use madelung_harness::config::{InitialState, OutputFormat, SweepConfig};
use madelung_harness::{load_artifacts, run_experiment, Artifacts, ExperimentConfig, ExperimentKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

fn wide_grid(n: usize) -> SpatialGrid {
    SpatialGrid::new(-20.0, 20.0, n, true).unwrap()
}

fn unit(mu: f64) -> PhysicsParams {
    PhysicsParams::new(1.0, 1.0, mu).unwrap()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn config(kind: ExperimentKind, dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind).resolve(Some(kind)).unwrap();
    c.output.dir = dir.to_path_buf();
    c
}

/// Figure 1 with the discrete learner: m = 1, μ = 1, ω = 1, x₀ = −5, u₀ = 0.
fn figure1() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let start = Instant::now();
    let report = run_experiment(&config(ExperimentKind::Figure1, dir.path()), None).map_err(e)?;
    let elapsed = start.elapsed().as_secs_f64();
    let traj = report.artifacts.trajectory.as_ref().ok_or("no trajectory")?;
    let reached = traj.rows.iter().position(|r| r.x.abs() < 1e-6);
    let density = report.artifacts.density.as_ref().ok_or("no density")?;
    let first = density.argmax(0);
    let last = density.argmax(density.snapshots.len() - 1);
    let pass = reached.is_some_and(|s| s <= 100)
        && (first + 5.0).abs() < 0.05
        && last.abs() < 0.05
        && elapsed < 1.0;
    Ok((
        pass,
        format!(
            "|x_t| < 1e-6 at step {reached:?} (<= 100); density argmax {first:.4} -> {last:.4}; {elapsed:.3} s (< 1 s)"
        ),
    ))
}

fn coherent_disruptor() -> Check {
    let start = Instant::now();
    let g = wide_grid(2048);
    let mut worst: f64 = 0.0;
    for x_t in [-5.0, 0.0, 1.3] {
        let psi = coherent_state(&CoherentStateParams::at_rest(x_t, 1.0), &g).map_err(e)?;
        let dis = disruptor_field(&g, &psi.amplitude(), &unit(1.0)).map_err(e)?;
        worst = worst.max(disruptor_at(&dis, x_t).map_err(e)?.abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-6 && elapsed < 1.0,
        format!("max |Dis(x_t)| = {worst:.3e} (< 1e-6); {elapsed:.3} s (< 1 s)"),
    ))
}

fn classical_limit_scaling() -> Check {
    let g = wide_grid(2048);
    let (a, s) = (0.3, 1.1);
    let r: Vec<f64> = g
        .points()
        .map(|x| (-(x - a) * (x - a) / (2.0 * s * s)).exp())
        .collect();
    let x_eval = a + 0.9;
    let scaled = |hbar: f64| -> Result<f64, String> {
        let p = PhysicsParams::new(1.0, hbar, 1.0).map_err(e)?;
        let d = disruptor_field(&g, &r, &p).map_err(e)?;
        Ok(disruptor_at(&d, x_eval).map_err(e)? / (hbar * hbar))
    };
    let reference = scaled(1.0)?;
    let mut worst: f64 = 0.0;
    for hbar in [0.5, 0.1] {
        worst = worst.max(((scaled(hbar)? - reference) / reference).abs());
    }
    let zero = disruptor_field(&g, &r, &PhysicsParams::new(1.0, 0.0, 1.0).map_err(e)?).map_err(e)?;
    let at_zero = disruptor_at(&zero, x_eval).map_err(e)?;
    let all_zero = zero.values.iter().all(|v| *v == 0.0);
    Ok((
        worst < 1e-10 && at_zero == 0.0 && all_zero,
        format!("max relative spread of Dis/hbar^2 = {worst:.2e} (< 1e-10); Dis(hbar=0) = {at_zero:?}"),
    ))
}

fn learner_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut worst: f64 = 0.0;
    let mut sets = Vec::new();
    for _ in 0..20 {
        let omega = rng.random_range(0.5..2.0);
        let mu = rng.random_range(0.05..=1.0);
        let beta: f64 = 1.0 - mu;
        // heavy ball on ½ω²x² is stable for 0 < αω² < 2(1 + β)
        let r = rng.random_range(0.05..1.9 * (1.0 + beta));
        let m = omega * omega / r;
        let x0 = rng.random_range(-10.0..10.0);
        let u0 = rng.random_range(-2.0..2.0);
        let params = PhysicsParams::new(m, 1.0, mu).map_err(e)?;
        let v = PotentialSpec::harmonic(omega);
        let mut q = LearnerState::new(x0, u0);
        let mut c = q;
        let mut zero = DisruptorSource::Zero;
        for _ in 0..1000 {
            q = quantum_learn_step(&q, &v, &mut zero, &params).map_err(e)?;
            c = momentum_gd_step(&c, &v, 1.0 / m, 1.0 - mu).map_err(e)?;
            worst = worst.max((q.x - c.x).abs()).max((q.u - c.u).abs());
        }
        sets.push(c.x.abs());
    }
    let settled = sets.iter().filter(|x| **x < 1e-6).count();
    Ok((
        worst == 0.0,
        format!("20 sets x 1000 steps, max |difference| = {worst:?} (== 0.0); {settled}/20 settled"),
    ))
}

fn max_centre_error(dt: f64) -> Result<f64, String> {
    let g = wide_grid(2048);
    let psi = coherent_state(&CoherentStateParams::at_rest(-5.0, 1.0), &g).map_err(e)?;
    let config = PropagatorConfig {
        dt,
        scheme: Scheme::SplitStepSpectral,
        t_final: 10.0,
        snapshot_every: usize::MAX,
    };
    let rec = evolve(&psi, &PotentialSpec::harmonic(1.0), &unit(1.0), &config).map_err(e)?;
    Ok(rec
        .series
        .iter()
        .map(|row| (row.x_mean - damped_oscillator_closed_form(-5.0, 0.0, 1.0, 1.0, row.t).0).abs())
        .fold(0.0, f64::max))
}

fn pde_ode() -> Check {
    let start = Instant::now();
    let coarse = max_centre_error(1e-3)?;
    let fine = max_centre_error(5e-4)?;
    let elapsed = start.elapsed().as_secs_f64();
    let ratio = coarse / fine;
    Ok((
        coarse < 1e-3 && (3.5..=4.5).contains(&ratio) && elapsed < 60.0,
        format!(
            "max |<x> - x_closed| = {coarse:.3e} (< 1e-3) at dt = 1e-3, {fine:.3e} at dt = 5e-4, ratio {ratio:.3} (in [3.5, 4.5]); {elapsed:.1} s (< 60 s)"
        ),
    ))
}

fn conservation() -> Check {
    let g = wide_grid(2048);
    let mut drifts = Vec::new();
    for mu in [0.0, 0.5, 1.0] {
        let cp = CoherentStateParams {
            x_t: -5.0,
            p_t: 0.5,
            s_t: 0.0,
            omega: 1.0,
        };
        let mut psi = coherent_state(&cp, &g).map_err(e)?;
        let start = norm(&psi);
        let mut prop =
            KostinPropagator::new(g, &PotentialSpec::harmonic(1.0), unit(mu), 1e-3, Scheme::SplitStepSpectral)
                .map_err(e)?;
        for _ in 0..10_000 {
            prop.step(&mut psi).map_err(e)?;
        }
        drifts.push((norm(&psi) - start).abs());
    }
    let worst = drifts.iter().cloned().fold(0.0, f64::max);
    Ok((
        worst < 1e-8,
        format!("norm drift over 1e4 steps for mu = 0, 0.5, 1: {} (< 1e-8)", sci(&drifts)),
    ))
}

fn quantum_potential_convergence() -> Check {
    let (omega, a): (f64, f64) = (1.0, 0.8);
    let mut errors = Vec::new();
    for n in [512, 1024, 2048, 4096] {
        let g = wide_grid(n);
        let r: Vec<f64> = g
            .points()
            .map(|x| (-0.5 * omega * (x - a) * (x - a)).exp())
            .collect();
        let q = quantum_potential(&g, &r, &unit(1.0)).map_err(e)?;
        let err = g
            .points()
            .zip(&r)
            .zip(&q.values)
            .filter(|((_, amp), _)| **amp >= NODE_DENSITY_FLOOR)
            .map(|((x, _), qv)| {
                let d = x - a;
                (qv + 0.5 * (omega * omega * d * d - omega)).abs()
            })
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    Ok((
        pass,
        format!("max error for n = 512..4096: {}; ratios {ratios:.3?} (each in [3.5, 4.5])", sci(&errors)),
    ))
}

fn window_means(mu: f64) -> Result<(f64, f64), String> {
    let v = PotentialSpec::harmonic(1.0);
    let run = run_learner(-5.0, 0.0, &v, &mut DisruptorSource::Zero, &unit(mu), 1000, 0.0).map_err(e)?;
    let rec = &run.records;
    let mean = |rows: &[madelung_core::StepRecord]| rows.iter().map(|r| r.v).sum::<f64>() / rows.len() as f64;
    Ok((mean(&rec[..100]), mean(&rec[rec.len() - 100..])))
}

fn no_friction_breakdown() -> Check {
    let (first, last) = window_means(0.0)?;
    let rel = (last - first).abs() / first;
    let (_, damped_last) = window_means(0.5)?;
    Ok((
        rel < 0.05,
        format!(
            "mu = 0: mean V first 100 = {first:.4}, last 100 = {last:.4}, relative change {rel:.3} (< 0.05); mu = 0.5 control ends at {damped_last:.1e}"
        ),
    ))
}

fn timeless(a: &Artifacts) -> Artifacts {
    let mut a = a.clone();
    for p in a.points.iter_mut().flatten() {
        p.meta.wall_time_s = 0.0;
    }
    a
}

/// Every file under `dir`, with `meta.json` reduced to its content minus `wall_time_s`.
fn tree(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(e)? {
            let path = entry.map_err(e)?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let key = path.strip_prefix(dir).map_err(e)?.display().to_string();
            let mut bytes = fs::read(&path).map_err(e)?;
            if key.ends_with("meta.json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).map_err(e)?;
                v.as_object_mut().ok_or("meta is not an object")?.remove("wall_time_s");
                bytes = serde_json::to_vec(&v).map_err(e)?;
            }
            out.insert(key, bytes);
        }
    }
    Ok(out)
}

fn determinism_and_round_trip() -> Check {
    let root = tempfile::tempdir().map_err(e)?;
    let mut configs = Vec::new();
    for kind in [ExperimentKind::Learn, ExperimentKind::Evolve, ExperimentKind::Compare, ExperimentKind::Figure1] {
        let mut c = config(kind, &root.path().join(kind.to_string()));
        c.output.format = OutputFormat::Json;
        if kind == ExperimentKind::Evolve {
            c.initial.state = InitialState::Coherent;
            c.physics.mu = 0.5;
            c.run.t_final = 5.0;
        }
        configs.push(c);
    }
    let mut sweep = config(ExperimentKind::Learn, &root.path().join("sweep"));
    sweep.experiment = Some(ExperimentKind::Sweep);
    sweep.output.format = OutputFormat::Json;
    sweep.sweep = Some(SweepConfig {
        experiment: ExperimentKind::Compare,
        parameter: "physics.mu".into(),
        values: vec![1.0, 0.5, 0.0, 0.2],
    });
    configs.push(sweep);

    let mut files = 0;
    for c in &configs {
        let dir = &c.output.dir;
        let first = run_experiment(c, None).map_err(e)?;
        let before = tree(dir)?;
        let second = run_experiment(c, None).map_err(e)?;
        if before != tree(dir)? {
            return Ok((false, format!("{} output changed between runs", c.kind())));
        }
        if timeless(&first.artifacts) != timeless(&second.artifacts) {
            return Ok((false, format!("{} in-memory records differ between runs", c.kind())));
        }
        let expected = Artifacts {
            points: Vec::new(),
            ..second.artifacts.clone()
        };
        let (meta, csv) = load_artifacts(dir, false).map_err(e)?;
        let (_, json) = load_artifacts(dir, true).map_err(e)?;
        if meta != second.meta || csv != expected || json != expected {
            return Ok((false, format!("{} files do not re-parse to the in-memory records", c.kind())));
        }
        for (i, p) in second.artifacts.points.iter().enumerate() {
            let p = p.as_ref().map_err(|r| r.message.clone())?;
            let (pm, pa) = load_artifacts(&dir.join(format!("point_{i:03}")), false).map_err(e)?;
            if pm != p.meta || pa != p.artifacts {
                return Ok((false, format!("sweep point {i} does not re-parse")));
            }
        }
        files += before.len();
    }
    Ok((
        true,
        format!("learn/evolve/compare/figure1/sweep: {files} files byte-identical across reruns and re-parsed exactly"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("Figure-1 reproduction (discrete learner)", figure1),
        ("coherent-state disruptor vanishes", coherent_disruptor),
        ("classical-limit scaling of Dis", classical_limit_scaling),
        ("learner equivalence with zero disruptor", learner_equivalence),
        ("PDE-ODE cross-validation and dt convergence", pde_ode),
        ("norm conservation over 1e4 steps", conservation),
        ("quantum-potential second-order accuracy", quantum_potential_convergence),
        ("no-friction breakdown", no_friction_breakdown),
        ("determinism and round-trip", determinism_and_round_trip),
    ];
    let mut failed = 0;
    println!("acceptance criteria");
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !pass {
            failed += 1;
        }
        println!("[{}] {} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
