//! Episodic tabular MDPs whose transitions may change adversarially at a
//! fixed subset of steps.
//!
//! Steps are 0-based internally: an episode visits steps `0..H`, and a
//! transition is taken after every step except the last. JSON and reports use
//! 1-based step numbers.

pub mod json;
pub mod occupancy;
pub mod regret;
pub mod simulate;
pub mod strategy;
pub mod supplier;

pub use occupancy::{conditioned_occupancy_forward, occupancy_measure, value_of_strategy};
pub use regret::{regret_report, RegretCurve};
pub use simulate::simulate_episode;
pub use strategy::{Branch, DeterministicPolicy, MarkovPolicy, Strategy};
pub use supplier::{EpisodeSupplier, History, ObliviousSequence};

use crate::error::{config, Result};

const ROW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpShape {
    pub s: usize,
    pub a: usize,
    pub h: usize,
    /// Adversarial steps, 0-based, sorted, each `< h - 1`.
    pub adv_steps: Vec<usize>,
    pub s_init: usize,
}

impl MdpShape {
    pub fn new(s: usize, a: usize, h: usize, adv_steps: Vec<usize>, s_init: usize) -> Result<Self> {
        let shape = Self { s, a, h, adv_steps, s_init };
        shape.validate()?;
        Ok(shape)
    }

    /// Builds a shape from 1-based adversarial step numbers.
    pub fn from_one_based(s: usize, a: usize, h: usize, adv: &[usize], s_init: usize) -> Result<Self> {
        if adv.iter().any(|&x| x == 0) {
            return config("adv_steps are 1-based; 0 is not a step");
        }
        Self::new(s, a, h, adv.iter().map(|x| x - 1).collect(), s_init)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 || self.a == 0 || self.h == 0 {
            return config(format!("S, A, H must be >= 1 (got {}, {}, {})", self.s, self.a, self.h));
        }
        if self.s_init >= self.s {
            return config(format!("s_init {} out of range for S = {}", self.s_init, self.s));
        }
        for w in self.adv_steps.windows(2) {
            if w[0] >= w[1] {
                return config("adv_steps must be strictly increasing");
            }
        }
        if let Some(&last) = self.adv_steps.last() {
            if last + 1 >= self.h {
                return config(format!(
                    "adversarial step {} has no transition (H = {})",
                    last + 1,
                    self.h
                ));
            }
        }
        Ok(())
    }

    pub fn adv_one_based(&self) -> Vec<usize> {
        self.adv_steps.iter().map(|x| x + 1).collect()
    }

    pub fn is_adv(&self, h: usize) -> bool {
        self.adv_steps.binary_search(&h).is_ok()
    }

    pub fn lambda(&self) -> usize {
        self.adv_steps.len()
    }

    /// Number of adversarial steps strictly before `h`.
    pub fn lambda_before(&self, h: usize) -> usize {
        self.adv_steps.iter().filter(|&&x| x < h).count()
    }

    /// True when the adversarial steps form one run of consecutive steps.
    pub fn adv_consecutive(&self) -> bool {
        self.adv_steps.windows(2).all(|w| w[1] == w[0] + 1)
    }

    pub fn n_transitions(&self) -> usize {
        self.h.saturating_sub(1)
    }
}

/// Per-step transition probabilities `p[h][s][a][s']` for `h < H - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    pub s: usize,
    pub a: usize,
    pub steps: usize,
    pub p: Vec<f64>,
}

impl TransitionKernel {
    pub fn zeros(s: usize, a: usize, steps: usize) -> Self {
        Self { s, a, steps, p: vec![0.0; steps * s * a * s] }
    }

    pub fn uniform(s: usize, a: usize, steps: usize) -> Self {
        Self { s, a, steps, p: vec![1.0 / s as f64; steps * s * a * s] }
    }

    pub fn for_shape(shape: &MdpShape) -> Self {
        Self::zeros(shape.s, shape.a, shape.n_transitions())
    }

    #[inline]
    pub fn idx(&self, h: usize, s: usize, a: usize, s2: usize) -> usize {
        ((h * self.s + s) * self.a + a) * self.s + s2
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize, s2: usize) -> f64 {
        self.p[self.idx(h, s, a, s2)]
    }

    #[inline]
    pub fn set(&mut self, h: usize, s: usize, a: usize, s2: usize, v: f64) {
        let i = self.idx(h, s, a, s2);
        self.p[i] = v;
    }

    pub fn row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let i = self.idx(h, s, a, 0);
        &self.p[i..i + self.s]
    }

    pub fn row_mut(&mut self, h: usize, s: usize, a: usize) -> &mut [f64] {
        let i = self.idx(h, s, a, 0);
        &mut self.p[i..i + self.s]
    }

    /// Copies step `h` of `other` into this kernel.
    pub fn copy_step_from(&mut self, other: &TransitionKernel, h: usize) {
        let n = self.s * self.a * self.s;
        let i = h * n;
        self.p[i..i + n].copy_from_slice(&other.p[i..i + n]);
    }

    pub fn step_equals(&self, other: &TransitionKernel, h: usize) -> bool {
        let n = self.s * self.a * self.s;
        let i = h * n;
        self.p[i..i + n] == other.p[i..i + n]
    }

    pub fn validate(&self, shape: &MdpShape) -> Result<()> {
        if self.s != shape.s || self.a != shape.a || self.steps != shape.n_transitions() {
            return config(format!(
                "kernel dimensions ({}, {}, {}) do not match shape ({}, {}, {})",
                self.s,
                self.a,
                self.steps,
                shape.s,
                shape.a,
                shape.n_transitions()
            ));
        }
        if self.p.len() != self.steps * self.s * self.a * self.s {
            return config("kernel storage has the wrong length");
        }
        for h in 0..self.steps {
            for s in 0..self.s {
                for a in 0..self.a {
                    let row = self.row(h, s, a);
                    if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                        return config(format!("kernel entry outside [0,1] at step {} ({s},{a})", h + 1));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_TOL {
                        return config(format!(
                            "kernel row at step {} ({s},{a}) sums to {sum}",
                            h + 1
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-episode losses `l[h][s][a]` in [0, 1], `h < H`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    pub s: usize,
    pub a: usize,
    pub h: usize,
    pub l: Vec<f64>,
}

impl LossTable {
    pub fn zeros(s: usize, a: usize, h: usize) -> Self {
        Self { s, a, h, l: vec![0.0; h * s * a] }
    }

    pub fn constant(s: usize, a: usize, h: usize, v: f64) -> Self {
        Self { s, a, h, l: vec![v; h * s * a] }
    }

    pub fn for_shape(shape: &MdpShape) -> Self {
        Self::zeros(shape.s, shape.a, shape.h)
    }

    #[inline]
    pub fn idx(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.s + s) * self.a + a
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize) -> f64 {
        self.l[self.idx(h, s, a)]
    }

    #[inline]
    pub fn set(&mut self, h: usize, s: usize, a: usize, v: f64) {
        let i = self.idx(h, s, a);
        self.l[i] = v;
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { l: self.l.iter().map(|x| x * alpha).collect(), ..self.clone() }
    }

    pub fn validate(&self, shape: &MdpShape) -> Result<()> {
        if self.s != shape.s || self.a != shape.a || self.h != shape.h || self.l.len() != shape.h * shape.s * shape.a {
            return config("loss table dimensions do not match shape");
        }
        if self.l.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return config("loss entries must lie in [0,1]");
        }
        Ok(())
    }
}

/// The kernel and losses chosen by the adversary for one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRealization {
    pub kernel: TransitionKernel,
    pub losses: LossTable,
}

impl EpisodeRealization {
    pub fn validate(&self, shape: &MdpShape) -> Result<()> {
        self.kernel.validate(shape)?;
        self.losses.validate(shape)
    }
}

/// One realized episode. `tags[h]` is the strategy branch taken at step `h`
/// (the action for plain policies, the sub-policy index at a block start).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub losses: Vec<f64>,
    pub tags: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn total_loss(&self) -> f64 {
        self.losses.iter().sum()
    }

    /// Same path with every observed loss multiplied by `alpha`.
    pub fn with_scaled_losses(&self, alpha: f64) -> Self {
        Self { losses: self.losses.iter().map(|x| x * alpha).collect(), ..self.clone() }
    }
}
