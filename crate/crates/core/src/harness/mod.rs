//! Experiment runner: config in, regret CSV and summary out.

pub mod config;
pub mod run;
pub mod slope;
pub mod sweep;

pub use config::{Assertions, ExperimentConfig, InstanceConfig};
pub use run::{curve_from_rows, mean_ci, mean_curve, read_csv, run, run_seed, CsvRow, ExperimentRecord, SeedRecord, SeedRunner, Summary};
pub use slope::slope;
pub use sweep::{expand, sweep, thread_count, with_pool, SweepEntry, THREADS_ENV};
