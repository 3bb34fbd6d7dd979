use rand::RngExt;

use super::strategy::check_branches;
use super::{Branch, EpisodeRealization, MdpShape, Strategy, Trajectory};
use crate::error::Result;
use crate::rng::StreamRng;

/// Inverse-CDF draw from a probability vector. Falls back to the last
/// positive entry when rounding leaves the draw past the total.
pub fn sample_index(rng: &mut StreamRng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn sample_branch(rng: &mut StreamRng, branches: &[Branch]) -> Branch {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for b in branches {
        acc += b.prob;
        if u < acc {
            return *b;
        }
    }
    *branches.last().expect("non-empty branch list")
}

/// Plays one episode of `strategy` against `realization`.
pub fn simulate_episode(
    shape: &MdpShape,
    realization: &EpisodeRealization,
    strategy: &dyn Strategy,
    rng: &mut StreamRng,
) -> Result<Trajectory> {
    realization.kernel.validate(shape)?;
    realization.losses.validate(shape)?;
    let hh = shape.h;
    let mut tr = Trajectory {
        states: Vec::with_capacity(hh),
        actions: Vec::with_capacity(hh),
        losses: Vec::with_capacity(hh),
        tags: Vec::with_capacity(hh),
    };
    let mut s = shape.s_init;
    let mut m = strategy.initial_memory();
    let mut branches = Vec::new();
    for h in 0..hh {
        strategy.branches(h, s, m, &mut branches);
        check_branches(&branches, h, s)?;
        let b = sample_branch(rng, &branches);
        tr.states.push(s);
        tr.actions.push(b.action);
        tr.tags.push(b.tag);
        tr.losses.push(realization.losses.get(h, s, b.action));
        if h + 1 < hh {
            let next = sample_index(rng, realization.kernel.row(h, s, b.action));
            m = strategy.advance(h, s, m, b.tag, next);
            s = next;
        }
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{LossTable, MarkovPolicy, TransitionKernel};
    use crate::rng::RngStreams;

    fn chain(s: usize, a: usize, h: usize) -> EpisodeRealization {
        let mut k = TransitionKernel::zeros(s, a, h - 1);
        for t in 0..h - 1 {
            for x in 0..s {
                for y in 0..a {
                    k.set(t, x, y, 0, 1.0);
                }
            }
        }
        EpisodeRealization { kernel: k, losses: LossTable::zeros(s, a, h) }
    }

    #[test]
    fn deterministic_chain_stays_home() {
        let sh = MdpShape::new(3, 2, 4, vec![], 0).unwrap();
        let pol = MarkovPolicy::uniform(3, 2, 4);
        let mut rng = RngStreams::new(3).stream("env");
        let tr = simulate_episode(&sh, &chain(3, 2, 4), &pol, &mut rng).unwrap();
        assert_eq!(tr.states, vec![0, 0, 0, 0]);
        assert_eq!(tr.len(), 4);
    }

    #[test]
    fn forced_transition() {
        let sh = MdpShape::new(2, 1, 2, vec![], 0).unwrap();
        let mut k = TransitionKernel::zeros(2, 1, 1);
        k.set(0, 0, 0, 1, 1.0);
        k.set(0, 1, 0, 1, 1.0);
        let r = EpisodeRealization { kernel: k, losses: LossTable::zeros(2, 1, 2) };
        let pol = MarkovPolicy::uniform(2, 1, 2);
        let mut rng = RngStreams::new(0).stream("env");
        let tr = simulate_episode(&sh, &r, &pol, &mut rng).unwrap();
        assert_eq!(tr.states, vec![0, 1]);
    }

    #[test]
    fn unnormalized_strategy_is_rejected() {
        let sh = MdpShape::new(1, 2, 1, vec![], 0).unwrap();
        let mut pol = MarkovPolicy::uniform(1, 2, 1);
        pol.pi[0] = 0.9;
        let r = EpisodeRealization { kernel: TransitionKernel::zeros(1, 2, 0), losses: LossTable::zeros(1, 2, 1) };
        let mut rng = RngStreams::new(0).stream("env");
        assert!(simulate_episode(&sh, &r, &pol, &mut rng).is_err());
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let sh = MdpShape::new(2, 2, 3, vec![], 0).unwrap();
        let r = chain(2, 2, 2);
        let pol = MarkovPolicy::uniform(2, 2, 3);
        let mut rng = RngStreams::new(0).stream("env");
        let err = simulate_episode(&sh, &r, &pol, &mut rng).unwrap_err();
        assert!(matches!(err, crate::Error::Config(_)));
    }
}
