//! Loss estimator for the sub-policy learner.
//!
//! Every sub-policy that would have produced the observed block actions
//! shares the feedback, so estimates are spread over the matched class and
//! normalized by its total optimistic mass.

use super::ComOmd;
use crate::conditions::matched_subpolicies;
use crate::error::{config, contract, Result};
use crate::mdp::Trajectory;
use crate::solvers::Coord;

pub(crate) fn estimate(l: &ComOmd, tr: &Trajectory) -> Result<(Vec<f64>, usize)> {
    let space = &l.space;
    let lay = &space.layout;
    let conds = &space.conds;
    let sp = conds.subpolicies().unwrap();
    let (h1, h2) = conds.block().unwrap();
    let hh = l.shape.h;
    let gamma = l.gamma();
    let mut est = vec![0.0; lay.total];
    let denom = |d: f64, h: usize| -> Result<f64> {
        if d > 0.0 {
            Ok(d)
        } else {
            contract(format!("estimator denominator {d} at step {}", h + 1))
        }
    };

    for h in 0..h1 {
        let k = Coord { h, c: 0, s: tr.states[h], x: tr.actions[h] };
        let d = denom(l.upper(k)? + gamma, h)?;
        let b = lay.base(h, 0, k.s, k.x);
        est[b..b + lay.steps[h].resolve].fill(tr.losses[h] / d);
    }

    let matched = matched_subpolicies(&tr.states[h1..h2], &tr.actions[h1..h2], sp);
    if !matched.contains(&tr.tags[h1]) {
        return config("trajectory tag at the block start is not a matching sub-policy");
    }
    let s1 = tr.states[h1];
    let block_loss: f64 = tr.losses[h1..h2].iter().sum();
    let mut mass = 0.0;
    for &sigma in &matched {
        mass += l.upper(Coord { h: h1, c: 0, s: s1, x: sigma })?;
    }
    let d = denom(mass + gamma, h1)?;
    for &sigma in &matched {
        est[lay.index(h1, 0, s1, sigma, 0)] = block_loss / d;
    }

    if h2 < hh {
        let s2 = tr.states[h2];
        for h in h2..hh {
            let (s, a) = (tr.states[h], tr.actions[h]);
            let mut mass = 0.0;
            for &sigma in &matched {
                mass += l.upper(Coord { h, c: conds.block_id(s1, sigma, s2), s, x: a })?;
            }
            let d = denom(mass + gamma, h)?;
            for &sigma in &matched {
                let b = lay.base(h, conds.block_id(s1, sigma, s2), s, a);
                est[b..b + lay.steps[h].resolve].fill(tr.losses[h] / d);
            }
        }
    }
    Ok((est, matched.len()))
}
