//! Best fixed Markov policy in hindsight, by exhaustive enumeration.
//!
//! The cumulative value is multilinear in the per-(h, s) action
//! distributions, so its minimum over Markov policies is attained at a
//! deterministic one.

use crate::error::{config, Result};
use crate::mdp::strategy::DeterministicPolicy;
use crate::mdp::{EpisodeRealization, MdpShape};

pub const MAX_POLICIES: usize = 4096;

/// Number of deterministic Markov policies, or an error above the cap.
pub fn policy_count(shape: &MdpShape, cap: usize) -> Result<usize> {
    let cells = shape.s * shape.h;
    let mut n: usize = 1;
    for _ in 0..cells {
        n = match n.checked_mul(shape.a) {
            Some(v) if v <= cap => v,
            _ => return config(format!("A^(S*H) = {}^{cells} exceeds the policy cap {cap}", shape.a)),
        };
    }
    Ok(n)
}

/// Backward evaluation of one deterministic policy.
pub fn deterministic_value(shape: &MdpShape, r: &EpisodeRealization, actions: &[usize]) -> f64 {
    let ns = shape.s;
    let mut v = vec![0.0; ns];
    for h in (0..shape.h).rev() {
        let mut nv = vec![0.0; ns];
        for (s, out) in nv.iter_mut().enumerate() {
            let a = actions[h * ns + s];
            let mut x = r.losses.get(h, s, a);
            if h + 1 < shape.h {
                x += r.kernel.row(h, s, a).iter().zip(&v).map(|(p, w)| p * w).sum::<f64>();
            }
            *out = x;
        }
        v = nv;
    }
    v[shape.s_init]
}

/// Running cumulative values of every deterministic policy.
#[derive(Debug, Clone)]
pub struct BenchmarkTracker {
    shape: MdpShape,
    policies: Vec<Vec<usize>>,
    cum: Vec<f64>,
}

impl BenchmarkTracker {
    pub fn new(shape: &MdpShape) -> Result<Self> {
        let n = policy_count(shape, MAX_POLICIES)?;
        let policies = (0..n).map(|i| DeterministicPolicy::from_index(shape.s, shape.a, shape.h, i).actions).collect();
        Ok(Self { shape: shape.clone(), policies, cum: vec![0.0; n] })
    }

    pub fn push(&mut self, r: &EpisodeRealization) -> Result<()> {
        r.validate(&self.shape)?;
        for (c, pol) in self.cum.iter_mut().zip(&self.policies) {
            *c += deterministic_value(&self.shape, r, pol);
        }
        Ok(())
    }

    /// Values of every policy on one realization, without accumulating.
    pub fn episode_values(&self, r: &EpisodeRealization) -> Vec<f64> {
        self.policies.iter().map(|p| deterministic_value(&self.shape, r, p)).collect()
    }

    /// Lowest cumulative value; ties go to the smallest policy index.
    pub fn best(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, &c) in self.cum.iter().enumerate() {
            if c < best.1 {
                best = (i, c);
            }
        }
        best
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn policy(&self, i: usize) -> DeterministicPolicy {
        DeterministicPolicy { s: self.shape.s, actions: self.policies[i].clone() }
    }
}

/// Argmin over deterministic Markov policies of the summed episode values.
pub fn best_markov_benchmark(shape: &MdpShape, realizations: &[EpisodeRealization]) -> Result<(DeterministicPolicy, f64)> {
    let mut t = BenchmarkTracker::new(shape)?;
    for r in realizations {
        t.push(r)?;
    }
    let (i, v) = t.best();
    Ok((t.policy(i), if realizations.is_empty() { 0.0 } else { v }))
}
