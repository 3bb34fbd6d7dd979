//! Block constructions that embed independent expert or bandit problems into
//! an episodic MDP, one per (waiting state, decision step) pair.
//!
//! States: `0` is the initial state, `1..=S~` the waiting states, then the
//! absorbing outcome states. Steps are 0-based here; a block with decision
//! step `h` (1-based, `2 <= h <= H~`) waits in `s_i` until step `h` and
//! routes on the action there.

use rand::RngExt;

use crate::error::{config, Result};
use crate::mdp::supplier::Adaptivity;
use crate::mdp::{EpisodeRealization, EpisodeSupplier, History, LossTable, MdpShape, TransitionKernel};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Outcome states `s~_0, s~_1`; the expert loss picks the outcome.
    Expert,
    /// Outcome states `s~_1..s~_A`; the action picks the outcome and the
    /// bandit loss is charged there.
    Bandit,
}

/// One embedded subproblem: waiting state `state`, decision step `step`
/// (1-based) and its episode range.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub state: usize,
    pub step: usize,
    pub start: usize,
    pub len: usize,
    pub best_arm: usize,
}

#[derive(Debug, Clone)]
pub struct BlockInstance {
    kind: BlockKind,
    shape: MdpShape,
    stationary: TransitionKernel,
    h_tilde: usize,
    s_tilde: usize,
    pub eps: f64,
    pub blocks: Vec<Block>,
    /// Embedded loss vector of every episode.
    embedded: Vec<Vec<f64>>,
}

fn half_horizon(h: usize) -> usize {
    h / 2
}

impl BlockInstance {
    /// Full-information construction; needs `S > 3`, `A >= 2`, `H >= 4`.
    pub fn ff(k: usize, s: usize, a: usize, h: usize, eps: Option<f64>, rng: &mut StreamRng) -> Result<Self> {
        if s <= 3 || a < 2 || h < 4 {
            return config(format!("ff_hard needs S > 3, A >= 2, H >= 4, got S={s} A={a} H={h}"));
        }
        Self::build(BlockKind::Expert, k, s, a, h, s - 3, eps, rng)
    }

    /// Bandit construction; needs `S > 2A`, `A >= 2`, `H >= 4`.
    pub fn bf(k: usize, s: usize, a: usize, h: usize, eps: Option<f64>, rng: &mut StreamRng) -> Result<Self> {
        if s <= 2 * a || a < 2 || h < 4 {
            return config(format!("bf_hard needs S > 2A, A >= 2, H >= 4, got S={s} A={a} H={h}"));
        }
        Self::build(BlockKind::Bandit, k, s, a, h, s - a - 1, eps, rng)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(kind: BlockKind, k: usize, s: usize, a: usize, h: usize, s_tilde: usize, eps: Option<f64>, rng: &mut StreamRng) -> Result<Self> {
        let h_tilde = half_horizon(h);
        let h_bar = h_tilde - 1;
        let n_blocks = s_tilde * h_bar;
        let t = k / n_blocks;
        if t == 0 {
            return config(format!("K={k} is smaller than the {n_blocks} blocks"));
        }
        let eps = match eps {
            Some(e) if e > 0.0 && e <= 0.5 => e,
            Some(e) => return config(format!("eps must lie in (0, 1/2], got {e}")),
            None => {
                let info = match kind {
                    BlockKind::Expert => (a as f64).ln(),
                    BlockKind::Bandit => a as f64,
                };
                (0.5 * (info / t as f64).sqrt()).min(0.25)
            }
        };
        let mut blocks = Vec::with_capacity(n_blocks);
        for i in 1..=s_tilde {
            for step in 2..=h_tilde {
                let b = (i - 1) * h_bar + (step - 2);
                blocks.push(Block { state: i, step, start: b * t, len: t, best_arm: rng.random_range(0..a) });
            }
        }
        let mut embedded = Vec::with_capacity(n_blocks * t);
        for bl in &blocks {
            for _ in 0..t {
                embedded.push((0..a).map(|x| f64::from(rng.random_bool(if x == bl.best_arm { 0.5 - eps } else { 0.5 }))).collect());
            }
        }
        // kernels vary on the transitions out of steps 1..=H~
        let shape = MdpShape::new(s, a, h, (0..h_tilde).collect(), 0)?;
        let mut stationary = TransitionKernel::zeros(s, a, h - 1);
        for g in 0..h - 1 {
            for x in 0..s {
                for y in 0..a {
                    stationary.set(g, x, y, x, 1.0);
                }
            }
        }
        Ok(Self { kind, shape, stationary, h_tilde, s_tilde, eps, blocks, embedded })
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn h_tilde(&self) -> usize {
        self.h_tilde
    }

    pub fn s_tilde(&self) -> usize {
        self.s_tilde
    }

    /// Per-step loss multiplier `H - H~ + 1`.
    pub fn amplification(&self) -> usize {
        self.shape.h - self.h_tilde + 1
    }

    pub fn episodes(&self) -> usize {
        self.embedded.len()
    }

    pub fn block_of(&self, k: usize) -> &Block {
        &self.blocks[k / self.blocks[0].len]
    }

    pub fn embedded_loss(&self, k: usize) -> &[f64] {
        &self.embedded[k]
    }

    /// The single step whose transition carries the decision in episode `k`
    /// (0-based), as adversarial-step metadata for conditioned learners.
    pub fn decision_step(&self, k: usize) -> usize {
        self.block_of(k).step - 1
    }

    fn outcome_state(&self, j: usize) -> usize {
        self.s_tilde + 1 + j
    }

    /// Realization of episode `k`.
    pub fn realization(&self, k: usize) -> Result<EpisodeRealization> {
        if k >= self.embedded.len() {
            return config(format!("instance has only {} episodes", self.embedded.len()));
        }
        let (s, a, h) = (self.shape.s, self.shape.a, self.shape.h);
        let bl = self.block_of(k);
        let lt = &self.embedded[k];
        let dec = bl.step - 1;
        let mut kernel = self.stationary.clone();
        for y in 0..a {
            kernel.row_mut(0, 0, y).fill(0.0);
            kernel.set(0, 0, y, bl.state, 1.0);
            let to = match self.kind {
                BlockKind::Expert => self.outcome_state(usize::from(lt[y] > 0.5)),
                BlockKind::Bandit => self.outcome_state(y),
            };
            kernel.row_mut(dec, bl.state, y).fill(0.0);
            kernel.set(dec, bl.state, y, to, 1.0);
        }
        let mut losses = LossTable::zeros(s, a, h);
        // losses on the outcome states from step H~ (1-based) on
        for g in self.h_tilde - 1..h {
            for y in 0..a {
                match self.kind {
                    BlockKind::Expert => losses.set(g, self.outcome_state(1), y, 1.0),
                    BlockKind::Bandit => {
                        for (j, &v) in lt.iter().enumerate() {
                            losses.set(g, self.outcome_state(j), y, v);
                        }
                    }
                }
            }
        }
        // the last decision step reaches the outcome one step late; its
        // missing step is charged on the decision itself
        if bl.step == self.h_tilde {
            for (y, &v) in lt.iter().enumerate() {
                losses.set(dec, bl.state, y, v);
            }
        }
        Ok(EpisodeRealization { kernel, losses })
    }
}

impl EpisodeSupplier for BlockInstance {
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
        Some(self.embedded.len())
    }

    fn generate(&mut self, k: usize, _history: &History) -> Result<EpisodeRealization> {
        self.realization(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::benchmark::deterministic_value;
    use crate::rng::RngStreams;

    #[test]
    fn ff_amplification_for_h4() {
        let mut rng = RngStreams::new(1).stream("ff");
        let inst = BlockInstance::ff(40, 5, 2, 4, None, &mut rng).unwrap();
        assert_eq!(inst.h_tilde(), 2);
        assert_eq!(inst.amplification(), 3);
        assert_eq!(inst.blocks.len(), 2);
    }

    #[test]
    fn block_count_s5_h6() {
        let mut rng = RngStreams::new(1).stream("ff");
        let inst = BlockInstance::ff(100, 5, 2, 6, None, &mut rng).unwrap();
        assert_eq!(inst.blocks.len(), inst.s_tilde() * (inst.h_tilde() - 1));
        assert_eq!(inst.blocks.len(), 4);
        assert_eq!(inst.episodes(), 100);
    }

    #[test]
    fn zero_expert_loss_gives_zero_episode_loss() {
        let mut rng = RngStreams::new(3).stream("ff");
        let inst = BlockInstance::ff(60, 5, 2, 6, None, &mut rng).unwrap();
        for k in 0..inst.episodes() {
            let r = inst.realization(k).unwrap();
            for y in 0..2 {
                let v = deterministic_value(&inst.shape, &r, &vec![y; 5 * 6]);
                assert_eq!(v, inst.amplification() as f64 * inst.embedded_loss(k)[y]);
            }
        }
    }

    #[test]
    fn bf_routes_action_to_its_outcome() {
        let mut rng = RngStreams::new(4).stream("bf");
        let inst = BlockInstance::bf(30, 6, 2, 4, None, &mut rng).unwrap();
        let r = inst.realization(0).unwrap();
        let bl = inst.block_of(0);
        for y in 0..2 {
            assert_eq!(r.kernel.get(bl.step - 1, bl.state, y, inst.outcome_state(y)), 1.0);
        }
    }
}
