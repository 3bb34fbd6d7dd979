//! Brute-force reference computations used by tests and acceptance runs.
//!
//! Nothing here calls into the solvers or learners it is meant to check.

pub mod barrier;
pub mod benchmark;
pub mod lp;
pub mod om_omd;
pub mod paths;

pub use barrier::{barrier_kl, entropic_objective, BarrierAnswer};
pub use benchmark::{best_markov_benchmark, BenchmarkTracker};
pub use lp::{exact_lp, LinearSystem, LpAnswer};
pub use om_omd::ReferenceOmOmd;
pub use paths::{enumerate_trajectories, exact_estimator_expectation, monte_carlo_occupancy, MonteCarloOccupancy};
