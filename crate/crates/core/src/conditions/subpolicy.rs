//! Deterministic sub-policies over a consecutive adversarial block.

use crate::error::{config, Result};
use crate::mdp::TransitionKernel;

/// All maps `(block step, state) -> action` for the block `h1..h2`.
///
/// Sub-policy `i` is decoded in base `A` with cell `(j, s)` at digit
/// position `j * S + s`, position 0 most significant, so index order is
/// lexicographic over the cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPolicySet {
    pub s: usize,
    pub a: usize,
    pub h1: usize,
    pub h2: usize,
    count: usize,
    table: Vec<u16>,
}

impl SubPolicySet {
    pub fn new(s: usize, a: usize, h1: usize, h2: usize, max_count: usize) -> Result<Self> {
        if h2 <= h1 {
            return config("empty sub-policy block");
        }
        let cells = s * (h2 - h1);
        let mut count: usize = 1;
        for _ in 0..cells {
            count = match count.checked_mul(a) {
                Some(c) if c <= max_count => c,
                _ => return config(format!("sub-policy count A^(S*len) = {a}^{cells} exceeds cap {max_count}")),
            };
        }
        let mut table = vec![0u16; count * cells];
        for i in 0..count {
            let mut x = i;
            for pos in (0..cells).rev() {
                table[i * cells + pos] = (x % a) as u16;
                x /= a;
            }
        }
        Ok(Self { s, a, h1, h2, count, table })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.h2 - self.h1
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Action of sub-policy `sigma` at block step `j` (0 = first block step).
    #[inline]
    pub fn action(&self, sigma: usize, j: usize, s: usize) -> usize {
        let cells = self.s * self.len();
        self.table[sigma * cells + j * self.s + s] as usize
    }

    /// Action sequence induced by `sigma` along a block path of states.
    pub fn actions_along(&self, sigma: usize, states: &[usize]) -> Vec<usize> {
        states.iter().enumerate().map(|(j, &s)| self.action(sigma, j, s)).collect()
    }
}

/// Sub-policies that play `actions[j]` at `states[j]` for every block step.
pub fn matched_subpolicies(states: &[usize], actions: &[usize], set: &SubPolicySet) -> Vec<usize> {
    (0..set.count())
        .filter(|&sigma| states.iter().zip(actions).enumerate().all(|(j, (&s, &a))| set.action(sigma, j, s) == a))
        .collect()
}

/// Distribution of the state at `h2` when starting the block at `s` and
/// playing `sigma` under `kernel`.
pub fn rho_subpolicy_dist(s: usize, sigma: usize, kernel: &TransitionKernel, set: &SubPolicySet) -> Vec<f64> {
    let mut d = vec![0.0; set.s];
    d[s] = 1.0;
    for j in 0..set.len() {
        let h = set.h1 + j;
        let mut next = vec![0.0; set.s];
        for (x, &w) in d.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let a = set.action(sigma, j, x);
            for (y, p) in kernel.row(h, x, a).iter().enumerate() {
                next[y] += w * p;
            }
        }
        d = next;
    }
    d
}

pub fn rho_subpolicy(s: usize, sigma: usize, s2: usize, kernel: &TransitionKernel, set: &SubPolicySet) -> f64 {
    rho_subpolicy_dist(s, sigma, kernel, set)[s2]
}
