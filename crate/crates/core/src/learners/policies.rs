//! Dense enumeration of deterministic Markov policies for the
//! fully-adversarial learners.

use crate::error::{config, Result};
use crate::mdp::simulate::sample_index;
use crate::mdp::strategy::DeterministicPolicy;
use crate::mdp::{EpisodeRealization, LossTable, MdpShape, TransitionKernel};
use crate::rng::StreamRng;

pub const MAX_POLICIES: usize = 4096;

#[derive(Debug, Clone)]
pub struct PolicySet {
    pub s: usize,
    pub a: usize,
    pub h: usize,
    s_init: usize,
    /// `actions[i][h * S + s]`, index order lexicographic with cell 0 first.
    pub actions: Vec<Vec<usize>>,
}

impl PolicySet {
    pub fn count(shape: &MdpShape) -> Result<usize> {
        let cells = shape.s * shape.h;
        (0..cells).try_fold(1usize, |n, _| match n.checked_mul(shape.a) {
            Some(v) if v <= MAX_POLICIES => Ok(v),
            _ => config(format!("{} deterministic policies exceed the cap {MAX_POLICIES}", format_args!("{}^{cells}", shape.a))),
        })
    }

    pub fn new(shape: &MdpShape) -> Result<Self> {
        let n = Self::count(shape)?;
        let cells = shape.s * shape.h;
        let actions = (0..n)
            .map(|mut i| {
                let mut v = vec![0; cells];
                for c in (0..cells).rev() {
                    v[c] = i % shape.a;
                    i /= shape.a;
                }
                v
            })
            .collect();
        Ok(Self { s: shape.s, a: shape.a, h: shape.h, s_init: shape.s_init, actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    #[inline]
    pub fn action(&self, i: usize, h: usize, s: usize) -> usize {
        self.actions[i][h * self.s + s]
    }

    /// State-action visit probabilities `q[(h * S + s) * A + a]`.
    pub fn occupancy(&self, i: usize, kernel: &TransitionKernel) -> Vec<f64> {
        let (ns, na) = (self.s, self.a);
        let mut q = vec![0.0; self.h * ns * na];
        let mut d = vec![0.0; ns];
        d[self.s_init] = 1.0;
        for h in 0..self.h {
            let mut next = vec![0.0; ns];
            for s in 0..ns {
                if d[s] == 0.0 {
                    continue;
                }
                let a = self.action(i, h, s);
                q[(h * ns + s) * na + a] += d[s];
                if h + 1 < self.h {
                    for (y, p) in kernel.row(h, s, a).iter().enumerate() {
                        next[y] += d[s] * p;
                    }
                }
            }
            d = next;
        }
        q
    }

    pub fn value(&self, i: usize, kernel: &TransitionKernel, losses: &LossTable) -> f64 {
        self.occupancy(i, kernel).iter().zip(&losses.l).map(|(q, l)| q * l).sum()
    }

    pub fn values(&self, kernel: &TransitionKernel, losses: &LossTable) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, kernel, losses)).collect()
    }
}

/// Exponential weights over a `PolicySet` plus the policy drawn for the
/// current episode.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub set: PolicySet,
    logw: Vec<f64>,
    rho: Vec<f64>,
    current: DeterministicPolicy,
}

impl Mixture {
    pub fn uniform(shape: &MdpShape) -> Result<Self> {
        let set = PolicySet::new(shape)?;
        let n = set.len();
        let current = DeterministicPolicy { s: set.s, actions: set.actions[0].clone() };
        Ok(Self { set, logw: vec![0.0; n], rho: vec![1.0 / n as f64; n], current })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn sample(&mut self, rng: &mut StreamRng) -> usize {
        let i = sample_index(rng, &self.rho);
        self.current.actions.clone_from(&self.set.actions[i]);
        i
    }

    pub fn current(&self) -> &DeterministicPolicy {
        &self.current
    }

    /// `sum_i rho_i V_i(r)`.
    pub fn expected_value(&self, r: &EpisodeRealization) -> f64 {
        (0..self.set.len()).map(|i| self.rho[i] * self.set.value(i, &r.kernel, &r.losses)).sum()
    }

    /// `rho <- rho exp(-eta loss)`, renormalized.
    pub fn update(&mut self, loss: &[f64], eta: f64) {
        for (w, l) in self.logw.iter_mut().zip(loss) {
            *w -= eta * l;
        }
        self.rho = softmax(&self.logw);
    }
}

/// Normalized exponential weights from cumulative log-weights.
pub fn softmax(logw: &[f64]) -> Vec<f64> {
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}
