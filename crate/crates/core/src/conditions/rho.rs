use super::{ConditionMode, ConditionSet, Triplet};
use crate::mdp::TransitionKernel;

/// Probability under `kernel` that every recorded transition happens.
pub fn rho(triplets: &[Triplet], kernel: &TransitionKernel) -> f64 {
    triplets.iter().map(|t| kernel.get(t.step, t.s, t.a, t.s2)).product()
}

/// `rho` for every condition id at step `h`.
pub fn rho_table(conds: &ConditionSet, h: usize, kernel: &TransitionKernel) -> Vec<f64> {
    match conds.mode {
        ConditionMode::ActionBased => (0..conds.count(h)).map(|id| rho(conds.triplets(h, id), kernel)).collect(),
        ConditionMode::SubPolicy => {
            let n = conds.count(h);
            let (h1, h2) = conds.block().unwrap();
            if h <= h1 || h < h2 {
                return vec![1.0; n];
            }
            let sp = conds.subpolicies().unwrap();
            let mut out = vec![0.0; n];
            for start in 0..conds.s {
                for sigma in 0..sp.count() {
                    let d = super::rho_subpolicy_dist(start, sigma, kernel, sp);
                    for (end, p) in d.iter().enumerate() {
                        out[conds.block_id(start, sigma, end)] = *p;
                    }
                }
            }
            out
        }
    }
}
