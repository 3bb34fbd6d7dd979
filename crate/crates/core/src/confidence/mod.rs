//! Visit counts, empirical kernels, confidence radii and the COM polytopes
//! built from them.

pub mod init;
pub mod lpdump;
pub mod polytope;

pub use init::initial_com;
pub use polytope::{build_action_polytope, build_polytope, build_subpolicy_polytope, membership_check, ComPolytopeSpec, IntervalRow, MembershipReport, SparseRow};

use crate::error::{config, Result};
use crate::mdp::{MdpShape, TransitionKernel, Trajectory};

/// Counters `N_h(s,a)` and `N_h(s,a,s')` over stationary steps.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitCounts {
    pub s: usize,
    pub a: usize,
    pub steps: usize,
    counted: Vec<bool>,
    pub n_sa: Vec<u64>,
    pub n_sas: Vec<u64>,
}

impl VisitCounts {
    pub fn new(shape: &MdpShape) -> Self {
        let steps = shape.n_transitions();
        Self {
            s: shape.s,
            a: shape.a,
            steps,
            counted: (0..steps).map(|h| !shape.is_adv(h)).collect(),
            n_sa: vec![0; steps * shape.s * shape.a],
            n_sas: vec![0; steps * shape.s * shape.a * shape.s],
        }
    }

    #[inline]
    fn sa(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.s + s) * self.a + a
    }

    pub fn n(&self, h: usize, s: usize, a: usize) -> u64 {
        self.n_sa[self.sa(h, s, a)]
    }

    pub fn n_next(&self, h: usize, s: usize, a: usize, s2: usize) -> u64 {
        self.n_sas[self.sa(h, s, a) * self.s + s2]
    }

    /// Counts every stationary transition of the trajectory.
    pub fn update(&mut self, tr: &Trajectory) {
        for h in 0..self.steps.min(tr.len().saturating_sub(1)) {
            if !self.counted[h] {
                continue;
            }
            let i = self.sa(h, tr.states[h], tr.actions[h]);
            self.n_sa[i] += 1;
            self.n_sas[i * self.s + tr.states[h + 1]] += 1;
        }
    }

    /// Empirical kernel; rows without visits (and adversarial steps) are
    /// uniform.
    pub fn empirical(&self) -> TransitionKernel {
        let mut k = TransitionKernel::uniform(self.s, self.a, self.steps);
        for h in 0..self.steps {
            for s in 0..self.s {
                for a in 0..self.a {
                    let n = self.n(h, s, a);
                    if n == 0 {
                        continue;
                    }
                    for s2 in 0..self.s {
                        k.set(h, s, a, s2, self.n_next(h, s, a, s2) as f64 / n as f64);
                    }
                }
            }
        }
        k
    }
}

/// Free function form used by the learners.
pub fn update_counts(counts: &mut VisitCounts, tr: &Trajectory) {
    counts.update(tr);
}

/// `ln(K S A / delta)`.
pub fn log_term(k_total: usize, s: usize, a: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return config(format!("delta must lie in (0,1), got {delta}"));
    }
    let k = k_total.max(1) as f64;
    Ok((k * s as f64 * a as f64 / delta).ln())
}

/// `2 sqrt(p L / max(1, N-1)) + 14 L / max(1, N-1)` with `L = ln(KSA/delta)`.
pub fn confidence_radius(pbar: f64, n: u64, k_total: usize, s: usize, a: usize, delta: f64) -> Result<f64> {
    let l = log_term(k_total, s, a, delta)?;
    Ok(radius_with_log(pbar, n, l))
}

#[inline]
pub fn radius_with_log(pbar: f64, n: u64, l: f64) -> f64 {
    let d = (n.saturating_sub(1)).max(1) as f64;
    2.0 * (pbar * l / d).sqrt() + 14.0 * l / d
}

/// Empirical kernel plus radii, indexed like the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSet {
    pub pbar: TransitionKernel,
    pub eps: Vec<f64>,
}

impl ConfidenceSet {
    pub fn from_counts(counts: &VisitCounts, k_total: usize, delta: f64) -> Result<Self> {
        let l = log_term(k_total, counts.s, counts.a, delta)?;
        let pbar = counts.empirical();
        let mut eps = vec![0.0; pbar.p.len()];
        for h in 0..counts.steps {
            for s in 0..counts.s {
                for a in 0..counts.a {
                    let n = counts.n(h, s, a);
                    for s2 in 0..counts.s {
                        let i = pbar.idx(h, s, a, s2);
                        eps[i] = radius_with_log(pbar.p[i], n, l);
                    }
                }
            }
        }
        Ok(Self { pbar, eps })
    }

    /// Uniform centre with radius one everywhere.
    pub fn vacuous(shape: &MdpShape) -> Self {
        let pbar = TransitionKernel::uniform(shape.s, shape.a, shape.n_transitions());
        let eps = vec![1.0; pbar.p.len()];
        Self { pbar, eps }
    }

    /// Feasible interval for `p_h(s'|s,a)`.
    #[inline]
    pub fn bounds(&self, h: usize, s: usize, a: usize, s2: usize) -> (f64, f64) {
        let i = self.pbar.idx(h, s, a, s2);
        ((self.pbar.p[i] - self.eps[i]).max(0.0), (self.pbar.p[i] + self.eps[i]).min(1.0))
    }

    /// True when `kernel` lies inside the box at every stationary step.
    pub fn contains(&self, shape: &MdpShape, kernel: &TransitionKernel) -> bool {
        (0..shape.n_transitions()).filter(|&h| !shape.is_adv(h)).all(|h| {
            (0..shape.s).all(|s| {
                (0..shape.a).all(|a| {
                    (0..shape.s).all(|s2| {
                        let i = kernel.idx(h, s, a, s2);
                        (kernel.p[i] - self.pbar.p[i]).abs() <= self.eps[i]
                    })
                })
            })
        })
    }
}
