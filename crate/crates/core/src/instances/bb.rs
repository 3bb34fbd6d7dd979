//! Two-state constructions where only the exact target action sequence is
//! rewarded and state labels carry no information about progress.
//!
//! The start state is fixed, so it serves as the good state at step 1 of
//! every copy; copies share the first target action and use their own pair
//! of states from step 2 on.

use rand::RngExt;

use crate::error::{config, Result};
use crate::mdp::supplier::Adaptivity;
use crate::mdp::{EpisodeRealization, EpisodeSupplier, History, LossTable, MdpShape, TransitionKernel};
use crate::rng::{RngStreams, StreamRng};

#[derive(Debug, Clone)]
pub struct TwoStateCopies {
    shape: MdpShape,
    stationary: TransitionKernel,
    streams: RngStreams,
    pub eps: f64,
    /// `targets[j][h]`.
    targets: Vec<Vec<usize>>,
    per_copy: usize,
}

/// `min(1/4, sqrt(A^H / K) / 2)`.
pub fn default_eps(a: usize, h: usize, k: usize) -> f64 {
    let m = (a as f64).powi(h as i32);
    (0.5 * (m / k.max(1) as f64).sqrt()).min(0.25)
}

impl TwoStateCopies {
    /// A single two-state copy over all `k` episodes.
    pub fn two_state(k: usize, a: usize, h: usize, eps: Option<f64>, seed: u64) -> Result<Self> {
        Self::build(k, 2, a, h, eps, seed)
    }

    /// `S / 2` independent copies on disjoint state pairs, `2K / S`
    /// consecutive episodes each.
    pub fn full(k: usize, s: usize, a: usize, h: usize, eps: Option<f64>, seed: u64) -> Result<Self> {
        if s < 2 || s % 2 != 0 {
            return config(format!("bb_full needs an even S >= 2, got {s}"));
        }
        Self::build(k, s, a, h, eps, seed)
    }

    fn build(k: usize, s: usize, a: usize, h: usize, eps: Option<f64>, seed: u64) -> Result<Self> {
        if a < 1 || h < 1 {
            return config("bb instance needs A >= 1 and H >= 1");
        }
        let copies = s / 2;
        let per_copy = 2 * k / s;
        let eps = match eps {
            Some(e) if e > 0.0 && e <= 0.25 => e,
            Some(e) => return config(format!("eps must lie in (0, 1/4], got {e}")),
            None => default_eps(a, h, per_copy),
        };
        let streams = RngStreams::new(seed);
        let mut rng = streams.stream("targets");
        let first = rng.random_range(0..a);
        let targets = (0..copies)
            .map(|_| {
                let mut t: Vec<usize> = (0..h).map(|_| rng.random_range(0..a)).collect();
                t[0] = first;
                t
            })
            .collect();
        let shape = MdpShape::new(s, a, h, (0..h - 1).collect(), 0)?;
        let stationary = TransitionKernel::uniform(s, a, h - 1);
        Ok(Self { shape, stationary, streams, eps, targets, per_copy })
    }

    pub fn copies(&self) -> usize {
        self.targets.len()
    }

    pub fn episodes_per_copy(&self) -> usize {
        self.per_copy
    }

    pub fn target(&self, copy: usize) -> &[usize] {
        &self.targets[copy]
    }

    pub fn copy_of(&self, k: usize) -> usize {
        k / self.per_copy
    }

    fn episode_rng(&self, k: usize) -> StreamRng {
        self.streams.indexed("episode", k as u64)
    }

    /// Good state at every step of episode `k`.
    pub fn good_states(&self, k: usize) -> Vec<usize> {
        let j = self.copy_of(k);
        let mut rng = self.episode_rng(k);
        (0..self.shape.h).map(|h| if h == 0 { 0 } else { 2 * j + usize::from(rng.random_bool(0.5)) }).collect()
    }

    pub fn realization(&self, k: usize) -> Result<EpisodeRealization> {
        if k >= self.per_copy * self.copies() {
            return config(format!("instance has only {} episodes", self.per_copy * self.copies()));
        }
        let (s, a, h) = (self.shape.s, self.shape.a, self.shape.h);
        let j = self.copy_of(k);
        let target = &self.targets[j];
        let mut rng = self.episode_rng(k);
        let good: Vec<usize> = (0..h).map(|g| if g == 0 { 0 } else { 2 * j + usize::from(rng.random_bool(0.5)) }).collect();
        let bad = |g: usize| if g == 0 { 1 } else { 4 * j + 1 - good[g] };
        let mut kernel = TransitionKernel::zeros(s, a, h - 1);
        for g in 0..h - 1 {
            for x in 0..s {
                for y in 0..a {
                    let to = if x == good[g] && y == target[g] {
                        good[g + 1]
                    } else if x == good[g] || x == bad(g) {
                        bad(g + 1)
                    } else {
                        x
                    };
                    kernel.set(g, x, y, to, 1.0);
                }
            }
        }
        let mut losses = LossTable::zeros(s, a, h);
        let last = h - 1;
        for x in [good[last], bad(last)] {
            for y in 0..a {
                let p = if x == good[last] && y == target[last] { 0.5 - self.eps } else { 0.5 };
                losses.set(last, x, y, f64::from(rng.random_bool(p)));
            }
        }
        Ok(EpisodeRealization { kernel, losses })
    }
}

impl EpisodeSupplier for TwoStateCopies {
    fn shape(&self) -> &MdpShape {
        &self.shape
    }

    fn stationary_kernel(&self) -> &TransitionKernel {
        &self.stationary
    }

    fn adaptivity(&self) -> Adaptivity {
        Adaptivity::Oblivious
    }

    fn max_episodes(&self) -> Option<usize> {
        Some(self.per_copy * self.copies())
    }

    fn generate(&mut self, k: usize, _history: &History) -> Result<EpisodeRealization> {
        self.realization(k)
    }
}
