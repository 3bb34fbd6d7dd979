//! Optimization over COM polytopes: the KL-regularized mirror step and
//! per-coordinate maximization.

pub mod kl;
pub mod simplex;
pub mod upper;

pub use kl::{omd_kl_step, KlOutcome, TraceRow};
pub use simplex::{LpOutcome, LpProblem};
pub use upper::{max_coordinate, max_coordinate_dp, max_coordinate_lp, policy_upper, Coord};

use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Cap on full sweeps over the constraint rows.
    pub max_iters: usize,
    pub tol_constraint: f64,
    pub tol_objective: f64,
    /// Lower bound on prior entries of free variables.
    pub floor: f64,
    /// Record one trace row per sweep.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iters: 200_000, tol_constraint: 1e-8, tol_objective: 1e-6, floor: 1e-12, trace: false }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_constraint > 0.0 && self.tol_objective > 0.0 && self.floor > 0.0) {
            return config("solver tolerances and floor must be positive");
        }
        if self.max_iters == 0 {
            return config("solver max_iters must be positive");
        }
        Ok(())
    }
}
