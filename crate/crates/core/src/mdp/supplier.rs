//! Adversaries that hand out one realization per episode.

use super::{EpisodeRealization, MdpShape, TransitionKernel, Trajectory};
use crate::error::{config, Result};

/// What the adversary may look at before choosing episode `k`.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adaptivity {
    Oblivious,
    Adaptive,
}

impl Adaptivity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Adaptivity::Oblivious => "oblivious",
            Adaptivity::Adaptive => "adaptive",
        }
    }
}

pub trait EpisodeSupplier: Send {
    fn shape(&self) -> &MdpShape;

    fn stationary_kernel(&self) -> &TransitionKernel;

    fn adaptivity(&self) -> Adaptivity;

    /// Upper limit on the episode count, if the construction has one.
    fn max_episodes(&self) -> Option<usize> {
        None
    }

    /// Raw realization for episode `k` (0-based).
    fn generate(&mut self, k: usize, history: &History) -> Result<EpisodeRealization>;

    /// Realization for episode `k`, validated and audited for stationarity.
    fn next_episode(&mut self, k: usize, history: &History) -> Result<EpisodeRealization> {
        let r = self.generate(k, history)?;
        r.validate(self.shape())?;
        check_stationarity(self.shape(), self.stationary_kernel(), &r.kernel)?;
        Ok(r)
    }
}

/// Fails unless `kernel` equals `stationary` at every step outside the
/// adversarial set.
pub fn check_stationarity(shape: &MdpShape, stationary: &TransitionKernel, kernel: &TransitionKernel) -> Result<()> {
    for h in 0..shape.n_transitions() {
        if !shape.is_adv(h) && !kernel.step_equals(stationary, h) {
            return config(format!("episode kernel differs from the stationary kernel at non-adversarial step {}", h + 1));
        }
    }
    Ok(())
}

/// A fixed, pre-generated sequence of realizations.
#[derive(Debug, Clone)]
pub struct ObliviousSequence {
    shape: MdpShape,
    stationary: TransitionKernel,
    episodes: Vec<EpisodeRealization>,
}

impl ObliviousSequence {
    pub fn new(shape: MdpShape, stationary: TransitionKernel, episodes: Vec<EpisodeRealization>) -> Result<Self> {
        stationary.validate(&shape)?;
        for (k, r) in episodes.iter().enumerate() {
            r.validate(&shape)?;
            check_stationarity(&shape, &stationary, &r.kernel)
                .map_err(|e| crate::Error::Config(format!("episode {}: {e}", k + 1)))?;
        }
        Ok(Self { shape, stationary, episodes })
    }

    pub fn episodes(&self) -> &[EpisodeRealization] {
        &self.episodes
    }
}

impl EpisodeSupplier for ObliviousSequence {
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
        Some(self.episodes.len())
    }

    fn generate(&mut self, k: usize, _history: &History) -> Result<EpisodeRealization> {
        match self.episodes.get(k) {
            Some(r) => Ok(r.clone()),
            None => config(format!("sequence has only {} episodes", self.episodes.len())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::LossTable;

    #[test]
    fn sequence_rejects_nonstationary_episode() {
        let sh = MdpShape::new(2, 1, 2, vec![], 0).unwrap();
        let stat = TransitionKernel::uniform(2, 1, 1);
        let mut k = stat.clone();
        k.set(0, 0, 0, 0, 1.0);
        k.set(0, 0, 0, 1, 0.0);
        let ep = EpisodeRealization { kernel: k, losses: LossTable::zeros(2, 1, 2) };
        assert!(ObliviousSequence::new(sh.clone(), stat.clone(), vec![ep.clone()]).is_err());
        let sh_adv = MdpShape::new(2, 1, 2, vec![0], 0).unwrap();
        assert!(ObliviousSequence::new(sh_adv, stat, vec![ep]).is_ok());
    }
}
