//! Online learning in episodic MDPs where transitions may change
//! adversarially at a known (or unknown) subset of steps.
//!
//! The learners work on conditioned occupancy measures: visit probabilities
//! paired with a record of the outcomes at adversarial steps.

pub mod conditions;
pub mod confidence;
pub mod error;
pub mod harness;
pub mod instances;
pub mod learners;
pub mod mdp;
pub mod oracle;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
