//! Hedge over deterministic Markov policies with full-information losses
//! and transitions.

use super::policies::Mixture;
use super::{Feedback, FeedbackNeeds, Learner, ParamValue};
use crate::error::Result;
use crate::mdp::{EpisodeRealization, MdpShape, Strategy};
use crate::rng::StreamRng;

pub struct Hedge {
    mix: Mixture,
    eta: ParamValue,
}

impl Hedge {
    pub fn new(shape: &MdpShape, eta: ParamValue) -> Result<Self> {
        Ok(Self { mix: Mixture::uniform(shape)?, eta })
    }

    pub fn rho(&self) -> &[f64] {
        self.mix.rho()
    }
}

impl Learner for Hedge {
    fn name(&self) -> &'static str {
        "hedge_ff"
    }

    fn needs(&self) -> FeedbackNeeds {
        FeedbackNeeds { losses: true, transitions: true }
    }

    fn begin_episode(&mut self, rng: &mut StreamRng) -> Result<()> {
        self.mix.sample(rng);
        Ok(())
    }

    fn strategy(&self) -> &dyn Strategy {
        self.mix.current()
    }

    fn expected_value(&self, _shape: &MdpShape, r: &EpisodeRealization) -> Result<f64> {
        Ok(self.mix.expected_value(r))
    }

    fn end_episode(&mut self, fb: &Feedback) -> Result<()> {
        let losses = fb.require_losses()?;
        let kernel = fb.require_kernel()?;
        let v = self.mix.set.values(kernel, losses);
        self.mix.update(&v, self.eta.used);
        Ok(())
    }

    fn params(&self) -> Vec<ParamValue> {
        vec![self.eta]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{LossTable, TransitionKernel, Trajectory};

    #[test]
    fn concentrates_on_the_better_policy() {
        let sh = MdpShape::new(1, 2, 1, vec![], 0).unwrap();
        let mut l = Hedge::new(&sh, ParamValue { name: "eta", raw: 0.5, used: 0.5 }).unwrap();
        let mut losses = LossTable::zeros(1, 2, 1);
        losses.set(0, 0, 1, 1.0);
        let k = TransitionKernel::uniform(1, 2, 0);
        let tr = Trajectory { states: vec![0], actions: vec![0], losses: vec![0.0], tags: vec![0] };
        let mut last = 0.5;
        for _ in 0..5 {
            l.end_episode(&Feedback { trajectory: &tr, losses: Some(&losses), kernel: Some(&k) }).unwrap();
            assert!(l.rho()[0] > last);
            last = l.rho()[0];
        }
        assert!(l.end_episode(&Feedback::bandit(&tr)).is_err());
    }
}
