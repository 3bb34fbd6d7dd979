use super::strategy::check_branches;
use super::{EpisodeRealization, LossTable, MarkovPolicy, MdpShape, Strategy, TransitionKernel};
use crate::error::{config, contract, Result};

/// Visit probabilities `q[h][s][a]`, stored with the loss-table layout.
pub type VisitTable = LossTable;

fn check_kernel(shape: &MdpShape, kernel: &TransitionKernel) -> Result<()> {
    if kernel.s != shape.s || kernel.a != shape.a || kernel.steps != shape.n_transitions() {
        return config("kernel dimensions do not match shape");
    }
    Ok(())
}

/// Forward recursion for a Markov policy.
pub fn occupancy_measure(shape: &MdpShape, kernel: &TransitionKernel, policy: &MarkovPolicy) -> Result<VisitTable> {
    check_kernel(shape, kernel)?;
    if policy.s != shape.s || policy.a != shape.a || policy.h != shape.h {
        return config("policy dimensions do not match shape");
    }
    let (ns, na) = (shape.s, shape.a);
    let mut q = VisitTable::for_shape(shape);
    let mut d = vec![0.0; ns];
    d[shape.s_init] = 1.0;
    for h in 0..shape.h {
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            if d[s] == 0.0 {
                continue;
            }
            for a in 0..na {
                let w = d[s] * policy.prob(h, s, a);
                q.set(h, s, a, w);
                if h + 1 < shape.h && w != 0.0 {
                    for (s2, p) in kernel.row(h, s, a).iter().enumerate() {
                        next[s2] += w * p;
                    }
                }
            }
        }
        d = next;
    }
    Ok(q)
}

/// Forward recursion over the joint (state, memory) chain of a
/// finite-memory strategy; returns the state-action marginals.
pub fn conditioned_occupancy_forward(
    shape: &MdpShape,
    kernel: &TransitionKernel,
    strategy: &dyn Strategy,
) -> Result<VisitTable> {
    check_kernel(shape, kernel)?;
    let (ns, na) = (shape.s, shape.a);
    let mut q = VisitTable::for_shape(shape);
    let mut msize = strategy.memory_size(0);
    let m0 = strategy.initial_memory();
    if m0 >= msize {
        return contract("initial memory out of range");
    }
    let mut d = vec![0.0; ns * msize];
    d[shape.s_init * msize + m0] = 1.0;
    let mut branches = Vec::new();
    for h in 0..shape.h {
        let last = h + 1 == shape.h;
        let nsize = if last { 0 } else { strategy.memory_size(h + 1) };
        let mut next = vec![0.0; ns * nsize];
        for s in 0..ns {
            for m in 0..msize {
                let w = d[s * msize + m];
                if w == 0.0 {
                    continue;
                }
                strategy.branches(h, s, m, &mut branches);
                check_branches(&branches, h, s)?;
                for b in &branches {
                    if b.action >= na {
                        return contract(format!("action {} out of range", b.action));
                    }
                    let wa = w * b.prob;
                    let i = q.idx(h, s, b.action);
                    q.l[i] += wa;
                    if last || wa == 0.0 {
                        continue;
                    }
                    for (s2, &p) in kernel.row(h, s, b.action).iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let m2 = strategy.advance(h, s, m, b.tag, s2);
                        if m2 >= nsize {
                            return contract(format!("memory {m2} out of range at step {}", h + 2));
                        }
                        next[s2 * nsize + m2] += wa * p;
                    }
                }
            }
        }
        d = next;
        msize = nsize;
    }
    Ok(q)
}

/// Expected episode loss of `strategy` on `realization`.
pub fn value_of_strategy(shape: &MdpShape, realization: &EpisodeRealization, strategy: &dyn Strategy) -> Result<f64> {
    let q = conditioned_occupancy_forward(shape, &realization.kernel, strategy)?;
    Ok(dot(&q, &realization.losses))
}

pub fn dot(q: &VisitTable, l: &LossTable) -> f64 {
    q.l.iter().zip(&l.l).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_occupancy_is_policy() {
        let sh = MdpShape::new(2, 3, 1, vec![], 1).unwrap();
        let mut pol = MarkovPolicy::uniform(2, 3, 1);
        pol.pi[3..6].copy_from_slice(&[0.2, 0.3, 0.5]);
        let q = occupancy_measure(&sh, &TransitionKernel::zeros(2, 3, 0), &pol).unwrap();
        assert_eq!(&q.l[3..6], &[0.2, 0.3, 0.5]);
        assert_eq!(&q.l[0..3], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn all_ones_loss_gives_horizon() {
        let sh = MdpShape::new(3, 2, 4, vec![], 0).unwrap();
        let r = EpisodeRealization { kernel: TransitionKernel::uniform(3, 2, 3), losses: LossTable::constant(3, 2, 4, 1.0) };
        let v = value_of_strategy(&sh, &r, &MarkovPolicy::uniform(3, 2, 4)).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }
}
