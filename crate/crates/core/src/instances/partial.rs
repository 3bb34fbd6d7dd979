//! Stationary transitions off the adversarial step set, adversary-chosen
//! transitions on it, adversarial losses everywhere.

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::supplier::Adaptivity;
use crate::mdp::{EpisodeRealization, EpisodeSupplier, History, LossTable, MdpShape, TransitionKernel};
use crate::rng::{RngStreams, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Fresh random rows on adversarial steps and fresh uniform losses
    /// every episode.
    ObliviousRandom,
    /// Deterministic routing to one state and a fixed loss table, both
    /// flipped at episodes `2^j - 1`.
    ObliviousWorstcaseSwitching,
    /// Charges the actions the learner has favoured so far and routes
    /// adversarial steps to the states worst for its empirical policy.
    AdaptiveGreedy,
}

impl AdversaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdversaryKind::ObliviousRandom => "oblivious_random",
            AdversaryKind::ObliviousWorstcaseSwitching => "oblivious_worstcase_switching",
            AdversaryKind::AdaptiveGreedy => "adaptive_greedy",
        }
    }
}

/// Uniform draw from the simplex.
fn random_row(rng: &mut StreamRng, out: &mut [f64]) {
    for v in out.iter_mut() {
        let u: f64 = rng.random();
        *v = -(1.0 - u).ln();
    }
    let t: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= t;
    }
    let rest: f64 = out[1..].iter().sum();
    out[0] = 1.0 - rest;
}

pub struct PartialAdversarial {
    shape: MdpShape,
    kind: AdversaryKind,
    stationary: TransitionKernel,
    streams: RngStreams,
    base: LossTable,
    /// Action counts `n[h][s][a]` from the trajectories seen so far.
    counts: LossTable,
    seen: usize,
}

impl PartialAdversarial {
    pub fn new(shape: &MdpShape, kind: AdversaryKind, seed: u64) -> Result<Self> {
        shape.validate()?;
        let streams = RngStreams::new(seed);
        let mut rng = streams.stream("stationary");
        let mut stationary = TransitionKernel::zeros(shape.s, shape.a, shape.n_transitions());
        for h in 0..shape.n_transitions() {
            for s in 0..shape.s {
                for a in 0..shape.a {
                    random_row(&mut rng, stationary.row_mut(h, s, a));
                }
            }
        }
        let mut base = LossTable::for_shape(shape);
        let mut lr = streams.stream("base_losses");
        for v in base.l.iter_mut() {
            *v = lr.random();
        }
        Ok(Self { shape: shape.clone(), kind, stationary, streams, base, counts: LossTable::for_shape(shape), seen: 0 })
    }

    pub fn kind(&self) -> AdversaryKind {
        self.kind
    }

    fn absorb(&mut self, history: &History) {
        for tr in &history.trajectories[self.seen.min(history.trajectories.len())..] {
            for h in 0..tr.len().min(self.shape.h) {
                let i = self.counts.idx(h, tr.states[h], tr.actions[h]);
                self.counts.l[i] += 1.0;
            }
        }
        self.seen = history.trajectories.len();
    }

    /// Empirical action frequencies with one pseudo-count per action.
    fn empirical(&self, h: usize, s: usize) -> Vec<f64> {
        let a = self.shape.a;
        let row: Vec<f64> = (0..a).map(|x| self.counts.get(h, s, x) + 1.0).collect();
        let t: f64 = row.iter().sum();
        row.into_iter().map(|v| v / t).collect()
    }

    fn random_episode(&self, k: usize) -> EpisodeRealization {
        let sh = &self.shape;
        let mut rng = self.streams.indexed("episode", k as u64);
        let mut kernel = self.stationary.clone();
        for &h in &sh.adv_steps {
            for s in 0..sh.s {
                for a in 0..sh.a {
                    random_row(&mut rng, kernel.row_mut(h, s, a));
                }
            }
        }
        let mut losses = LossTable::for_shape(sh);
        for v in losses.l.iter_mut() {
            *v = rng.random();
        }
        EpisodeRealization { kernel, losses }
    }

    fn switching_episode(&self, k: usize) -> EpisodeRealization {
        let sh = &self.shape;
        let phase = (usize::BITS - (k + 1).leading_zeros() - 1) as usize;
        let to = phase % sh.s;
        let mut kernel = self.stationary.clone();
        for &h in &sh.adv_steps {
            for s in 0..sh.s {
                for a in 0..sh.a {
                    let row = kernel.row_mut(h, s, a);
                    row.fill(0.0);
                    row[to] = 1.0;
                }
            }
        }
        let losses = if phase % 2 == 0 { self.base.clone() } else { LossTable { l: self.base.l.iter().map(|v| 1.0 - v).collect(), ..self.base.clone() } };
        EpisodeRealization { kernel, losses }
    }

    fn greedy_episode(&self) -> EpisodeRealization {
        let sh = &self.shape;
        let mut losses = LossTable::for_shape(sh);
        for h in 0..sh.h {
            for s in 0..sh.s {
                let pi = self.empirical(h, s);
                for a in 0..sh.a {
                    losses.set(h, s, a, 0.5 * self.base.get(h, s, a) + 0.5 * pi[a]);
                }
            }
        }
        let mut kernel = self.stationary.clone();
        let mut v = vec![0.0; sh.s];
        for h in (0..sh.h).rev() {
            if h + 1 < sh.h && sh.is_adv(h) {
                let worst = (0..sh.s).fold(0, |b, y| if v[y] > v[b] { y } else { b });
                for s in 0..sh.s {
                    for a in 0..sh.a {
                        let row = kernel.row_mut(h, s, a);
                        row.fill(0.0);
                        row[worst] = 1.0;
                    }
                }
            }
            let mut nv = vec![0.0; sh.s];
            for (s, out) in nv.iter_mut().enumerate() {
                let pi = self.empirical(h, s);
                for a in 0..sh.a {
                    let mut q = losses.get(h, s, a);
                    if h + 1 < sh.h {
                        q += kernel.row(h, s, a).iter().zip(&v).map(|(p, w)| p * w).sum::<f64>();
                    }
                    *out += pi[a] * q;
                }
            }
            v = nv;
        }
        EpisodeRealization { kernel, losses }
    }
}

impl EpisodeSupplier for PartialAdversarial {
    fn shape(&self) -> &MdpShape {
        &self.shape
    }

    fn stationary_kernel(&self) -> &TransitionKernel {
        &self.stationary
    }

    fn adaptivity(&self) -> Adaptivity {
        match self.kind {
            AdversaryKind::AdaptiveGreedy => Adaptivity::Adaptive,
            _ => Adaptivity::Oblivious,
        }
    }

    fn generate(&mut self, k: usize, history: &History) -> Result<EpisodeRealization> {
        Ok(match self.kind {
            AdversaryKind::ObliviousRandom => self.random_episode(k),
            AdversaryKind::ObliviousWorstcaseSwitching => self.switching_episode(k),
            AdversaryKind::AdaptiveGreedy => {
                self.absorb(history);
                self.greedy_episode()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_step_set_is_stationary() {
        let sh = MdpShape::new(3, 2, 4, vec![], 0).unwrap();
        for kind in [AdversaryKind::ObliviousRandom, AdversaryKind::ObliviousWorstcaseSwitching, AdversaryKind::AdaptiveGreedy] {
            let mut p = PartialAdversarial::new(&sh, kind, 7).unwrap();
            for k in 0..5 {
                let r = p.next_episode(k, &History::default()).unwrap();
                assert_eq!(r.kernel, p.stationary);
            }
        }
    }

    #[test]
    fn random_episodes_are_reproducible() {
        let sh = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
        let mut a = PartialAdversarial::new(&sh, AdversaryKind::ObliviousRandom, 3).unwrap();
        let mut b = PartialAdversarial::new(&sh, AdversaryKind::ObliviousRandom, 3).unwrap();
        let h = History::default();
        assert_eq!(a.next_episode(4, &h).unwrap(), b.next_episode(4, &h).unwrap());
        assert_ne!(a.next_episode(4, &h).unwrap(), a.next_episode(5, &h).unwrap());
    }

    #[test]
    fn switching_phases() {
        let sh = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
        let p = PartialAdversarial::new(&sh, AdversaryKind::ObliviousWorstcaseSwitching, 3).unwrap();
        assert_eq!(p.switching_episode(0).kernel.get(0, 0, 0, 0), 1.0);
        assert_eq!(p.switching_episode(1).kernel.get(0, 0, 0, 1), 1.0);
        assert_eq!(p.switching_episode(2).kernel.get(0, 0, 0, 1), 1.0);
        assert_eq!(p.switching_episode(3).kernel.get(0, 0, 0, 0), 1.0);
    }
}
