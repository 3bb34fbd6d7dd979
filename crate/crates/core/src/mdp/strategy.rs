//! Strategies as finite-memory controllers.
//!
//! Markov policies use a single memory cell. Condition-dependent policies keep
//! the current condition id as memory and update it after every transition.

use crate::error::{contract, Result};

/// One option the strategy may take at a state: play `action` with
/// probability `prob`. `tag` identifies the option for memory updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub prob: f64,
    pub action: usize,
    pub tag: usize,
}

pub trait Strategy {
    /// Number of memory cells at step `h`.
    fn memory_size(&self, h: usize) -> usize;

    fn initial_memory(&self) -> usize {
        0
    }

    /// Writes the branches available at `(h, s, m)` into `out` (cleared first).
    fn branches(&self, h: usize, s: usize, m: usize, out: &mut Vec<Branch>);

    /// Memory at step `h + 1` after taking branch `tag` at `(h, s, m)` and
    /// landing in `next`.
    fn advance(&self, h: usize, s: usize, m: usize, tag: usize, next: usize) -> usize;
}

pub(crate) fn check_branches(out: &[Branch], h: usize, s: usize) -> Result<()> {
    let sum: f64 = out.iter().map(|b| b.prob).sum();
    if (sum - 1.0).abs() > 1e-12 || out.iter().any(|b| !(b.prob >= 0.0)) {
        return contract(format!("strategy distribution at step {} state {s} sums to {sum}", h + 1));
    }
    Ok(())
}

/// Stochastic Markov policy `pi[h][s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPolicy {
    pub s: usize,
    pub a: usize,
    pub h: usize,
    pub pi: Vec<f64>,
}

impl MarkovPolicy {
    pub fn uniform(s: usize, a: usize, h: usize) -> Self {
        Self { s, a, h, pi: vec![1.0 / a as f64; h * s * a] }
    }

    /// Deterministic policy from `actions[h * S + s]`.
    pub fn deterministic(s: usize, a: usize, h: usize, actions: &[usize]) -> Self {
        let mut pi = vec![0.0; h * s * a];
        for (i, &act) in actions.iter().enumerate() {
            pi[i * a + act] = 1.0;
        }
        Self { s, a, h, pi }
    }

    #[inline]
    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.pi[(h * self.s + s) * self.a + a]
    }

    pub fn dist(&self, h: usize, s: usize) -> &[f64] {
        let i = (h * self.s + s) * self.a;
        &self.pi[i..i + self.a]
    }
}

impl Strategy for MarkovPolicy {
    fn memory_size(&self, _h: usize) -> usize {
        1
    }

    fn branches(&self, h: usize, s: usize, _m: usize, out: &mut Vec<Branch>) {
        out.clear();
        for (a, &p) in self.dist(h, s).iter().enumerate() {
            if p > 0.0 {
                out.push(Branch { prob: p, action: a, tag: a });
            }
        }
    }

    fn advance(&self, _h: usize, _s: usize, _m: usize, _tag: usize, _next: usize) -> usize {
        0
    }
}

/// Deterministic Markov policy stored as one action per `(h, s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy {
    pub s: usize,
    pub actions: Vec<usize>,
}

impl DeterministicPolicy {
    /// Decodes the `index`-th policy in lexicographic order over
    /// `(h, s)` cells, the first cell being the most significant digit.
    pub fn from_index(s: usize, a: usize, h: usize, mut index: usize) -> Self {
        let n = s * h;
        let mut actions = vec![0; n];
        for cell in (0..n).rev() {
            actions[cell] = index % a;
            index /= a;
        }
        Self { s, actions }
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.s + s]
    }
}

impl Strategy for DeterministicPolicy {
    fn memory_size(&self, _h: usize) -> usize {
        1
    }

    fn branches(&self, h: usize, s: usize, _m: usize, out: &mut Vec<Branch>) {
        out.clear();
        let a = self.action(h, s);
        out.push(Branch { prob: 1.0, action: a, tag: a });
    }

    fn advance(&self, _h: usize, _s: usize, _m: usize, _tag: usize, _next: usize) -> usize {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_index_is_lexicographic() {
        let p0 = DeterministicPolicy::from_index(2, 2, 1, 0);
        let p1 = DeterministicPolicy::from_index(2, 2, 1, 1);
        let p2 = DeterministicPolicy::from_index(2, 2, 1, 2);
        assert_eq!(p0.actions, vec![0, 0]);
        assert_eq!(p1.actions, vec![0, 1]);
        assert_eq!(p2.actions, vec![1, 0]);
    }

    #[test]
    fn markov_branches_skip_zero_mass() {
        let p = MarkovPolicy::deterministic(1, 3, 1, &[2]);
        let mut out = Vec::new();
        p.branches(0, 0, 0, &mut out);
        assert_eq!(out, vec![Branch { prob: 1.0, action: 2, tag: 2 }]);
    }
}
