//! Closed-form starting points for the mirror-descent learners.
//!
//! When the first step is adversarial, only conditions whose first triplet
//! starts in `s_init` can carry mass, so the per-condition share is taken
//! over those anchored conditions.

use std::sync::Arc;

use crate::conditions::{Com, ComSpace, ConditionMode, StepKind};

pub fn initial_com(space: &Arc<ComSpace>) -> Com {
    match space.conds.mode {
        ConditionMode::ActionBased => action_init(space),
        ConditionMode::SubPolicy => subpolicy_init(space),
    }
}

fn action_init(space: &Arc<ComSpace>) -> Com {
    let sh = &space.shape;
    let conds = &space.conds;
    let lay = &space.layout;
    let (s, a) = (sh.s as f64, sh.a as f64);
    let anchored = sh.is_adv(0);
    let mut com = Com::zeros(space);
    for h in 0..sh.h {
        let st = lay.steps[h];
        let stoch = st.kind == StepKind::Stochastic;
        let res = if stoch { s } else { 1.0 };
        if h == 0 {
            let v = 1.0 / (a * res);
            for x in 0..sh.a {
                for s2 in 0..st.resolve {
                    com.v[lay.index(0, 0, sh.s_init, x, s2)] = v;
                }
            }
            continue;
        }
        let lam = conds.lambda_at(h) as i32;
        let c_eff = if anchored { st.n_cond as f64 / s } else { st.n_cond as f64 };
        let after_adv = sh.is_adv(h - 1);
        for c in 0..st.n_cond {
            if anchored && conds.triplets(h, c)[0].s != sh.s_init {
                continue;
            }
            let pinned = if after_adv { conds.triplets(h, c).last().map(|t| t.s2) } else { None };
            let v = match pinned {
                Some(_) => s.powi(lam) / (a * res * c_eff),
                None => s.powi(lam) / (s * a * res * c_eff),
            };
            for st_s in 0..sh.s {
                if pinned.is_some_and(|p| p != st_s) {
                    continue;
                }
                let b = lay.base(h, c, st_s, 0);
                com.v[b..b + sh.a * st.resolve].fill(v);
            }
        }
    }
    com
}

fn subpolicy_init(space: &Arc<ComSpace>) -> Com {
    let sh = &space.shape;
    let conds = &space.conds;
    let lay = &space.layout;
    let (h1, h2) = conds.block().unwrap();
    let n_sigma = conds.subpolicies().unwrap().count() as f64;
    let (s, a) = (sh.s as f64, sh.a as f64);
    let mut com = Com::zeros(space);
    for h in 0..sh.h {
        let st = lay.steps[h];
        let res = if st.kind == StepKind::Stochastic { s } else { 1.0 };
        match st.kind {
            StepKind::BlockInterior => {}
            StepKind::SubPolicyChoice => {
                let (lo, hi, v) = if h1 == 0 { (sh.s_init, sh.s_init + 1, 1.0 / n_sigma) } else { (0, sh.s, 1.0 / (s * n_sigma)) };
                for st_s in lo..hi {
                    let b = lay.base(h, 0, st_s, 0);
                    com.v[b..b + st.n_choice].fill(v);
                }
            }
            _ if h < h1 => {
                let (lo, hi, v) = if h == 0 { (sh.s_init, sh.s_init + 1, 1.0 / (a * res)) } else { (0, sh.s, 1.0 / (s * a * res)) };
                for st_s in lo..hi {
                    let b = lay.base(h, 0, st_s, 0);
                    com.v[b..b + sh.a * st.resolve].fill(v);
                }
            }
            _ => {
                // h >= h2; starts other than s_init are unreachable when the
                // block opens the episode
                let start_share = if h1 == 0 { 1.0 } else { s };
                for c in 0..st.n_cond {
                    let (start, _, end) = conds.decode_block(c);
                    if h1 == 0 && start != sh.s_init {
                        continue;
                    }
                    let v = if h == h2 {
                        1.0 / (start_share * a * res * n_sigma)
                    } else {
                        1.0 / (start_share * s * a * res * n_sigma)
                    };
                    for st_s in 0..sh.s {
                        if h == h2 && st_s != end {
                            continue;
                        }
                        let b = lay.base(h, c, st_s, 0);
                        com.v[b..b + sh.a * st.resolve].fill(v);
                    }
                }
            }
        }
    }
    com
}
