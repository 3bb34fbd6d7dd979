//! Exponential weights with uniform exploration over COM-OMD instances, one
//! per candidate adversarial step set, for when the step set is unknown.

use super::policies::softmax;
use super::{ComOmd, ComOmdParams, Feedback, Learner, ParamValue};
use crate::conditions::ConditionMode;
use crate::error::{config, Result};
use crate::mdp::simulate::sample_index;
use crate::mdp::{value_of_strategy, EpisodeRealization, MdpShape, Strategy};
use crate::rng::StreamRng;

/// All `lambda`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, lambda: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < left {
                break;
            }
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, lambda, &mut Vec::new(), &mut out);
    out
}

pub struct MetaExp3 {
    shape: MdpShape,
    candidates: Vec<Vec<usize>>,
    inners: Vec<ComOmd>,
    logw: Vec<f64>,
    nu_hat: Vec<f64>,
    nu: Vec<f64>,
    eta: f64,
    xi: f64,
    chosen: usize,
    last_estimate: Vec<f64>,
    param_log: Vec<ParamValue>,
}

impl MetaExp3 {
    /// Candidates are the `lambda`-subsets of the steps with a transition.
    pub fn new(shape: &MdpShape, lambda: usize, inner: ComOmdParams, eta: f64, xi: f64) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) || !(eta >= 0.0) {
            return config(format!("meta needs xi in (0, 1] and eta >= 0, got xi={xi} eta={eta}"));
        }
        let candidates = subsets(shape.n_transitions(), lambda);
        if candidates.is_empty() {
            return config(format!("no {lambda}-subset of {} transition steps", shape.n_transitions()));
        }
        let mut inners = Vec::with_capacity(candidates.len());
        for c in &candidates {
            let sh = MdpShape::new(shape.s, shape.a, shape.h, c.clone(), shape.s_init)?;
            inners.push(ComOmd::new(&sh, ConditionMode::ActionBased, inner.clone())?);
        }
        let n = candidates.len();
        let u = vec![1.0 / n as f64; n];
        Ok(Self {
            shape: shape.clone(),
            candidates,
            inners,
            logw: vec![0.0; n],
            nu_hat: u.clone(),
            nu: u,
            eta,
            xi,
            chosen: 0,
            last_estimate: vec![0.0; n],
            param_log: Vec::new(),
        })
    }

    pub(crate) fn set_param_log(&mut self, p: Vec<ParamValue>) {
        self.param_log = p;
    }

    /// Candidate step sets, 0-based.
    pub fn candidates(&self) -> &[Vec<usize>] {
        &self.candidates
    }

    pub fn inners(&self) -> &[ComOmd] {
        &self.inners
    }

    /// Sampling distribution, exploration included.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn nu_hat(&self) -> &[f64] {
        &self.nu_hat
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }

    /// Instance-level loss estimate from the last update.
    pub fn last_estimate(&self) -> &[f64] {
        &self.last_estimate
    }

    /// Plays instance `i` in the current episode.
    pub fn choose(&mut self, i: usize) {
        self.chosen = i;
    }

    /// Expected episode loss of every inner instance's current policy.
    pub fn inner_values(&self, r: &EpisodeRealization) -> Result<Vec<f64>> {
        self.inners.iter().map(|l| value_of_strategy(&self.shape, r, l.strategy())).collect()
    }

    /// `1{I = i} sum_h l_h / nu(i)`.
    pub fn instance_estimate(&self, total_loss: f64) -> Vec<f64> {
        (0..self.nu.len()).map(|i| if i == self.chosen { total_loss / self.nu[i] } else { 0.0 }).collect()
    }
}

impl Learner for MetaExp3 {
    fn name(&self) -> &'static str {
        "meta_unknown"
    }

    fn begin_episode(&mut self, rng: &mut StreamRng) -> Result<()> {
        self.chosen = sample_index(rng, &self.nu);
        Ok(())
    }

    fn strategy(&self) -> &dyn Strategy {
        self.inners[self.chosen].strategy()
    }

    fn expected_value(&self, _shape: &MdpShape, r: &EpisodeRealization) -> Result<f64> {
        Ok(self.inner_values(r)?.iter().zip(&self.nu).map(|(v, p)| v * p).sum())
    }

    fn end_episode(&mut self, fb: &Feedback) -> Result<()> {
        let i = self.chosen;
        let scaled = fb.trajectory.with_scaled_losses(1.0 / self.nu[i]);
        self.inners[i].update(&scaled)?;
        let est = self.instance_estimate(fb.trajectory.total_loss());
        for (w, l) in self.logw.iter_mut().zip(&est) {
            *w -= self.eta * l;
        }
        self.nu_hat = softmax(&self.logw);
        let n = self.nu.len() as f64;
        self.nu = self.nu_hat.iter().map(|p| (1.0 - self.xi) * p + self.xi / n).collect();
        self.last_estimate = est;
        Ok(())
    }

    fn params(&self) -> Vec<ParamValue> {
        self.param_log.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::UpperMode;
    use crate::mdp::Trajectory;
    use crate::solvers::SolverOptions;

    fn inner() -> ComOmdParams {
        ComOmdParams { eta: 0.1, gamma: 0.05, delta: 0.1, k_total: 50, upper: UpperMode::Policy, solver: SolverOptions::default() }
    }

    #[test]
    fn subsets_in_order() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn two_candidates_start_uniform() {
        let sh = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
        let m = MetaExp3::new(&sh, 1, inner(), 0.1, 0.2).unwrap();
        assert_eq!(m.candidates(), &[vec![0], vec![1]]);
        assert_eq!(m.nu(), &[0.5, 0.5]);
    }

    #[test]
    fn full_exploration_stays_uniform() {
        let sh = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
        let mut m = MetaExp3::new(&sh, 1, inner(), 0.5, 1.0).unwrap();
        let tr = Trajectory { states: vec![0, 1, 0], actions: vec![1, 0, 1], losses: vec![1.0, 0.5, 1.0], tags: vec![1, 0, 1] };
        for k in 0..3 {
            m.choose(k % 2);
            m.end_episode(&Feedback::bandit(&tr)).unwrap();
            assert_eq!(m.nu(), &[0.5, 0.5]);
        }
        assert!(m.nu_hat()[0] != 0.5);
    }
}
