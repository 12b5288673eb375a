//! Configuration-driven experiment runner for `madelung-core`.
//!
//! Parses strict TOML experiment configs, runs learner / propagator
//! experiments and writes plot-ready CSV (plus optional JSON mirrors) and a
//! `meta.json` that is sufficient to repeat the run.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{load_config, parse_config, parse_config_json, ExperimentConfig, ExperimentKind};
pub use error::{ConfigErrorKind, ErrorReport, HarnessError};
pub use experiment::{
    initial_wavefunction, load_artifacts, run_experiment, Artifacts, Meta, RunReport, RunStatus,
};
