//! Policy-level EXP4 learners: bandit losses with full transitions, and
//! bandit losses with bandit transitions.

use super::policies::Mixture;
use super::{Feedback, FeedbackNeeds, Learner, ParamValue};
use crate::error::{config, Result};
use crate::mdp::{EpisodeRealization, MdpShape, Strategy, TransitionKernel, Trajectory};
use crate::rng::StreamRng;

/// Smallest denominator used by the estimators.
pub const MASS_FLOOR: f64 = 1e-12;

fn check_len(shape: &MdpShape, tr: &Trajectory) -> Result<()> {
    if tr.len() != shape.h {
        return config("trajectory length does not match the horizon");
    }
    Ok(())
}

pub struct BfExp4 {
    shape: MdpShape,
    mix: Mixture,
    eta: ParamValue,
    floored: usize,
}

impl BfExp4 {
    pub fn new(shape: &MdpShape, eta: ParamValue) -> Result<Self> {
        Ok(Self { shape: shape.clone(), mix: Mixture::uniform(shape)?, eta, floored: 0 })
    }

    pub fn rho(&self) -> &[f64] {
        self.mix.rho()
    }

    /// Number of visited pairs whose mixture mass hit the floor.
    pub fn floored(&self) -> usize {
        self.floored
    }

    /// `sum_pi rho(pi) q^pi` on the `(h * S + s) * A + a` layout.
    pub fn mixture_occupancy(&self, kernel: &TransitionKernel) -> Vec<f64> {
        let set = &self.mix.set;
        let mut q = vec![0.0; self.shape.h * self.shape.s * self.shape.a];
        for (i, &r) in self.mix.rho().iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for (m, o) in q.iter_mut().zip(set.occupancy(i, kernel)) {
                *m += r * o;
            }
        }
        q
    }

    /// State-action loss estimate and the number of floored entries.
    pub fn loss_estimate(&self, tr: &Trajectory, kernel: &TransitionKernel) -> Result<(Vec<f64>, usize)> {
        check_len(&self.shape, tr)?;
        let q = self.mixture_occupancy(kernel);
        let mut est = vec![0.0; q.len()];
        let mut floored = 0;
        for h in 0..self.shape.h {
            let i = (h * self.shape.s + tr.states[h]) * self.shape.a + tr.actions[h];
            if q[i] < MASS_FLOOR {
                floored += 1;
            }
            est[i] = tr.losses[h] / q[i].max(MASS_FLOOR);
        }
        Ok((est, floored))
    }

    /// `<q^pi, lhat>` for every policy.
    pub fn policy_estimates(&self, tr: &Trajectory, kernel: &TransitionKernel) -> Result<(Vec<f64>, usize)> {
        let (est, floored) = self.loss_estimate(tr, kernel)?;
        let set = &self.mix.set;
        let v = (0..set.len()).map(|i| set.occupancy(i, kernel).iter().zip(&est).map(|(q, l)| q * l).sum()).collect();
        Ok((v, floored))
    }
}

impl Learner for BfExp4 {
    fn name(&self) -> &'static str {
        "exp4_bf"
    }

    fn needs(&self) -> FeedbackNeeds {
        FeedbackNeeds { losses: false, transitions: true }
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
        let kernel = fb.require_kernel()?;
        let (v, floored) = self.policy_estimates(fb.trajectory, kernel)?;
        self.floored += floored;
        self.mix.update(&v, self.eta.used);
        Ok(())
    }

    fn params(&self) -> Vec<ParamValue> {
        vec![self.eta]
    }
}

pub struct BbExp4 {
    shape: MdpShape,
    mix: Mixture,
    eta: ParamValue,
    floored: usize,
}

impl BbExp4 {
    pub fn new(shape: &MdpShape, eta: ParamValue) -> Result<Self> {
        Ok(Self { shape: shape.clone(), mix: Mixture::uniform(shape)?, eta, floored: 0 })
    }

    pub fn rho(&self) -> &[f64] {
        self.mix.rho()
    }

    pub fn floored(&self) -> usize {
        self.floored
    }

    /// Policies that would have played the trajectory's actions at its states.
    pub fn matching(&self, tr: &Trajectory) -> Vec<bool> {
        let set = &self.mix.set;
        (0..set.len()).map(|i| (0..self.shape.h).all(|h| set.action(i, h, tr.states[h]) == tr.actions[h])).collect()
    }

    /// Per-policy loss estimate: the episode loss over the class mass on the
    /// matching class, zero elsewhere.
    pub fn policy_estimates(&self, tr: &Trajectory) -> Result<(Vec<f64>, bool)> {
        check_len(&self.shape, tr)?;
        let m = self.matching(tr);
        let mass: f64 = m.iter().zip(self.mix.rho()).filter(|(b, _)| **b).map(|(_, r)| r).sum();
        let total = tr.total_loss();
        let v = m.iter().map(|&b| if b { total / mass.max(MASS_FLOOR) } else { 0.0 }).collect();
        Ok((v, mass < MASS_FLOOR))
    }
}

impl Learner for BbExp4 {
    fn name(&self) -> &'static str {
        "exp4_bb"
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
        let (v, floored) = self.policy_estimates(fb.trajectory)?;
        self.floored += usize::from(floored);
        self.mix.update(&v, self.eta.used);
        Ok(())
    }

    fn params(&self) -> Vec<ParamValue> {
        vec![self.eta]
    }
}
