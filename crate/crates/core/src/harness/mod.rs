//! Experiment orchestration: configuration, replicated runs, sweeps and
//! every output file.

pub mod config;
pub mod format;
pub mod plot;
pub mod run;

pub use config::{ExperimentConfig, ModelKind};
pub use run::{aggregate, rep_seed, run, run_experiment, run_sweep, simulate_all, simulate_rep, RepResult, SweepRow};
