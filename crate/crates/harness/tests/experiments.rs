use std::fs;
use std::path::Path;

use madelung_core::dynamics::Scheme;
use madelung_harness::config::{DisruptorKind, InitialState, OutputFormat, SweepConfig};
use madelung_harness::{
    load_artifacts, parse_config, run_experiment, Artifacts, ExperimentConfig, ExperimentKind,
    RunReport, RunStatus,
};

fn config(kind: ExperimentKind, dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind).resolve(Some(kind)).unwrap();
    c.output.dir = dir.to_path_buf();
    c
}

fn without_points(a: &Artifacts) -> Artifacts {
    Artifacts {
        points: Vec::new(),
        ..a.clone()
    }
}

fn assert_round_trip(report: &RunReport, dir: &Path) {
    let (meta, csv) = load_artifacts(dir, false).unwrap();
    assert_eq!(meta, report.meta);
    assert_eq!(csv, without_points(&report.artifacts));
    if report.meta.config.output.format == OutputFormat::Json {
        let (_, json) = load_artifacts(dir, true).unwrap();
        assert_eq!(json, without_points(&report.artifacts));
    }
}

#[test]
fn figure1_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&config(ExperimentKind::Figure1, dir.path()), None).unwrap();
    let a = &report.artifacts;
    let traj = a.trajectory.as_ref().unwrap();
    assert!(traj.rows.len() <= 101);
    assert!(traj.rows.last().unwrap().x.abs() < 1e-6);
    assert!(matches!(report.meta.status, RunStatus::Converged { .. }));
    let density = a.density.as_ref().unwrap();
    assert!((density.argmax(0) + 5.0).abs() < 0.05);
    assert!(density.argmax(density.snapshots.len() - 1).abs() < 0.05);
    assert_eq!(report.meta.snapshot_times.len(), 21);
    assert_eq!(report.exit_code(), 0);
    for name in ["trajectory.csv", "packet.csv", "density.csv", "observables.csv", "oracle.csv", "meta.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    assert_round_trip(&report, dir.path());
}

#[test]
fn compare_with_zero_disruptor_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for mu in [1.0, 0.3, 0.0] {
        let mut c = config(ExperimentKind::Compare, dir.path());
        c.physics.mu = mu;
        c.run.steps = 300;
        let report = run_experiment(&c, None).unwrap();
        let diff = report.artifacts.difference.as_ref().unwrap();
        assert_eq!(diff.rows.len(), report.artifacts.trajectory.as_ref().unwrap().rows.len());
        assert!(diff.rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
        assert_round_trip(&report, dir.path());
    }
}

#[test]
fn evolve_coherent_state_follows_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Evolve, dir.path());
    c.physics.mu = 0.5;
    c.initial.state = InitialState::Coherent;
    c.run.t_final = 5.0;
    c.run.dt = 1e-3;
    c.run.snapshot_every = 1000;
    let report = run_experiment(&c, None).unwrap();
    let traj = report.artifacts.trajectory.as_ref().unwrap();
    let oracle = report.artifacts.oracle.as_ref().unwrap();
    let x_closed = oracle.column("x_closed").unwrap();
    assert_eq!(traj.rows.len(), 5001);
    let mut max_dis: f64 = 0.0;
    for (row, x) in traj.rows.iter().zip(&x_closed) {
        assert!((row.x - x).abs() < 1e-3, "t = {}", row.t);
        max_dis = max_dis.max(row.dis.abs());
    }
    // exactly zero for the ansatz; the propagated packet only approximates it
    assert!(max_dis < 1e-4, "{max_dis:e}");
    assert!(traj.rows.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(report.artifacts.density.as_ref().unwrap().snapshots.len(), 6);
}

#[test]
fn zero_duration_evolution_keeps_the_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Evolve, dir.path());
    c.run.t_final = 0.0;
    let report = run_experiment(&c, None).unwrap();
    assert_eq!(report.meta.snapshot_times, vec![0.0]);
    let header = fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert!(header.starts_with("x,rho_t0\n"));
    assert_eq!(report.artifacts.trajectory.as_ref().unwrap().rows.len(), 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Figure1, dir.path());
    c.output.format = OutputFormat::Json;
    c.run.t_final = 2.0;
    let snapshot = |files: &[String]| -> Vec<(String, Vec<u8>)> {
        files
            .iter()
            .filter(|f| f.as_str() != "meta.json")
            .map(|f| (f.clone(), fs::read(dir.path().join(f)).unwrap()))
            .collect()
    };
    let first = run_experiment(&c, None).unwrap();
    let files_a = snapshot(&first.meta.files);
    let second = run_experiment(&c, None).unwrap();
    assert_eq!(files_a, snapshot(&second.meta.files));
    let mut m1 = first.meta.clone();
    let mut m2 = second.meta.clone();
    m1.wall_time_s = 0.0;
    m2.wall_time_s = 0.0;
    assert_eq!(m1, m2);
    assert_round_trip(&second, dir.path());
}

#[test]
fn metadata_alone_reruns_the_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Learn, dir.path());
    c.physics.mu = 0.4;
    c.initial.x0 = 3.0;
    let first = run_experiment(&c, None).unwrap();
    let meta = fs::read_to_string(dir.path().join("meta.json")).unwrap();
    let again = madelung_harness::parse_config_json(&meta, None).unwrap();
    assert_eq!(again, c);
    let second = run_experiment(&again, None).unwrap();
    assert_eq!(first.artifacts, second.artifacts);
}

#[test]
fn divergence_still_writes_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Learn, dir.path());
    c.physics.m = 0.2;
    c.physics.mu = 0.0;
    let report = run_experiment(&c, None).unwrap();
    let RunStatus::Diverged { step } = report.meta.status else {
        panic!("expected divergence, got {:?}", report.meta.status)
    };
    assert_eq!(report.exit_code(), 4);
    let traj = report.artifacts.trajectory.as_ref().unwrap();
    assert_eq!(traj.rows.len(), step + 1);
    assert!(traj.rows.last().unwrap().x.abs() > 1e6);
    assert_round_trip(&report, dir.path());
}

#[test]
fn sweep_keeps_config_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Learn, dir.path());
    let values = vec![1.0, 0.5, 0.1, 0.0, 0.75, 0.25];
    c.experiment = Some(ExperimentKind::Sweep);
    c.sweep = Some(SweepConfig {
        experiment: ExperimentKind::Learn,
        parameter: "physics.mu".into(),
        values: values.clone(),
    });
    c.validate().unwrap();
    let report = run_experiment(&c, None).unwrap();
    let rows = report.artifacts.sweep.as_ref().unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), values);
    assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
    assert_eq!(rows[0].status, "converged");
    assert_eq!(rows[3].status, "max_steps");
    for (i, point) in report.artifacts.points.iter().enumerate() {
        let point = point.as_ref().unwrap();
        assert_eq!(point.meta.config.physics.mu, values[i]);
        assert!(dir.path().join(format!("point_{i:03}/trajectory.csv")).exists());
    }
    assert_round_trip(&report, dir.path());

    let serial: Vec<_> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = c.sweep_point(i, *v).unwrap();
            run_experiment(&p, None).unwrap().artifacts
        })
        .collect();
    for (a, b) in report.artifacts.points.iter().zip(&serial) {
        assert_eq!(&a.as_ref().unwrap().artifacts, b);
    }
}

#[test]
fn classical_limit_field_disruptor_matches_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Compare, dir.path());
    c.physics.hbar = 0.0;
    c.physics.mu = 0.5;
    c.learner.disruptor = DisruptorKind::Field;
    let report = run_experiment(&c, None).unwrap();
    let diff = report.artifacts.difference.as_ref().unwrap();
    assert!(diff.rows.iter().all(|r| r[1].abs() < 1e-12));
}

#[test]
fn field_disruptor_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Learn, dir.path());
    c.learner.disruptor = DisruptorKind::Field;
    c.initial.x0 = -1.0;
    c.run.steps = 5;
    c.run.stop_tol = 0.0;
    let report = run_experiment(&c, None).unwrap();
    let traj = report.artifacts.trajectory.as_ref().unwrap();
    assert_eq!(traj.rows.len(), 6);
    assert_eq!(traj.rows[0].dis, 0.0);
    assert!(traj.rows[1..].iter().any(|r| r.dis != 0.0));
}

#[test]
fn custom_table_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("psi.csv");
    let mut text = String::from("x,re,im\n");
    for j in 0..=200 {
        let x = -8.0 + 0.04 * j as f64;
        let a = (-(x + 4.0) * (x + 4.0) / 2.0).exp();
        text.push_str(&format!("{x},{a},0\n"));
    }
    fs::write(&table, text).unwrap();
    let doc = format!(
        "experiment = \"evolve\"\n[initial]\nstate = \"custom\"\ntable = {:?}\n[run]\nt_final = 0.5\n[output]\ndir = {:?}\n",
        table.display().to_string(),
        dir.path().join("out").display().to_string()
    );
    let c = parse_config(&doc, None).unwrap();
    let report = run_experiment(&c, None).unwrap();
    let first = &report.artifacts.trajectory.as_ref().unwrap().rows[0];
    assert!((first.x + 4.0).abs() < 1e-3);
}

#[test]
fn crank_nicolson_on_a_closed_grid() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Evolve, dir.path());
    c.grid.periodic = false;
    c.grid.n = 2001;
    c.run.scheme = Scheme::CrankNicolson;
    c.run.t_final = 1.0;
    let report = run_experiment(&c, None).unwrap();
    let obs = report.artifacts.observables.as_ref().unwrap();
    assert!(obs.column("norm").unwrap().iter().all(|n| (n - 1.0).abs() < 1e-8));
    assert_eq!(report.meta.scheme, Scheme::CrankNicolson);
}
