//! Scripted learner that always plays one deterministic Markov policy.

use super::{Feedback, Learner};
use crate::error::{config, Result};
use crate::mdp::strategy::DeterministicPolicy;
use crate::mdp::{MdpShape, Strategy};

pub struct FixedPolicy {
    policy: DeterministicPolicy,
}

impl FixedPolicy {
    /// `actions[h][s]`.
    pub fn from_actions(shape: &MdpShape, actions: &[Vec<usize>]) -> Result<Self> {
        if actions.len() != shape.h || actions.iter().any(|r| r.len() != shape.s) {
            return config(format!("fixed_policy actions must be an H x S table ({} x {})", shape.h, shape.s));
        }
        if actions.iter().flatten().any(|&a| a >= shape.a) {
            return config("fixed_policy action out of range");
        }
        Ok(Self { policy: DeterministicPolicy { s: shape.s, actions: actions.concat() } })
    }

    pub fn new(policy: DeterministicPolicy) -> Self {
        Self { policy }
    }
}

impl Learner for FixedPolicy {
    fn name(&self) -> &'static str {
        "fixed_policy"
    }

    fn strategy(&self) -> &dyn Strategy {
        &self.policy
    }

    fn end_episode(&mut self, _fb: &Feedback) -> Result<()> {
        Ok(())
    }
}
