//! Largest value of one COM coordinate over the polytope.
//!
//! Polytope members are exactly the COMs of some condition-dependent policy
//! under some condition-dependent kernel inside the confidence box, so the
//! maximum of `mu_h(s, x, c)` is a reach probability along the single
//! condition chain ending in `c`: a backward pass that maximizes over
//! actions and over each box. Fixing the policy instead gives the upper
//! bound used by the learners' estimators.

use super::simplex::{LpOutcome, LpProblem};
use super::SolverOptions;
use crate::conditions::{ComSpace, ConditionMode, ConditionedPolicy, StepKind};
use crate::confidence::{ComPolytopeSpec, ConfidenceSet};
use crate::error::{config, Error, Result};

/// Largest free-variable count handed to the dense simplex.
pub const LP_MAX_VARS: usize = 200;

/// `mu_h(s, x, c)`; `x` is an action, or a sub-policy at the block start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coord {
    pub h: usize,
    pub c: usize,
    pub s: usize,
    pub x: usize,
}

fn check_coord(space: &ComSpace, k: Coord) -> Result<()> {
    let lay = &space.layout;
    if k.h >= lay.steps.len() {
        return config(format!("coordinate step {} out of range", k.h + 1));
    }
    let st = lay.steps[k.h];
    if st.kind == StepKind::BlockInterior || k.c >= st.n_cond || k.s >= space.shape.s || k.x >= st.n_choice {
        return config(format!("coordinate {k:?} does not index the layout"));
    }
    Ok(())
}

/// Exact maximum through the simplex for small polytopes, the dynamic
/// program otherwise.
pub fn max_coordinate(poly: &ComPolytopeSpec, k: Coord, opts: &SolverOptions) -> Result<f64> {
    opts.validate()?;
    if poly.n_free() <= LP_MAX_VARS {
        max_coordinate_lp(poly, k)
    } else {
        max_coordinate_dp(poly, k)
    }
}

pub fn max_coordinate_lp(poly: &ComPolytopeSpec, k: Coord) -> Result<f64> {
    let lay = &poly.space.layout;
    check_coord(&poly.space, k)?;
    let z = &poly.forced_zero;
    let mut map = vec![usize::MAX; poly.n_vars()];
    let mut n = 0;
    for (i, m) in map.iter_mut().enumerate() {
        if !z[i] {
            *m = n;
            n += 1;
        }
    }
    let mut c = vec![0.0; n];
    let b = lay.base(k.h, k.c, k.s, k.x);
    let mut any = false;
    for i in b..b + lay.steps[k.h].resolve {
        if !z[i] {
            c[map[i]] = 1.0;
            any = true;
        }
    }
    if !any {
        return Ok(0.0);
    }
    let mut lp = LpProblem { n, c, eq: Vec::new(), le: Vec::new() };
    for r in &poly.eqs {
        let row: Vec<(usize, f64)> = r.idx.iter().zip(&r.coef).filter(|(i, _)| !z[**i]).map(|(&i, &v)| (map[i], v)).collect();
        if !row.is_empty() {
            lp.eq.push((row, r.rhs));
        }
    }
    for r in &poly.intervals {
        if z[r.target] {
            continue;
        }
        let others = r.group.clone().filter(|&i| i != r.target && !z[i]);
        if let Some(u) = r.upper() {
            let mut row = vec![(map[r.target], 1.0 - u)];
            row.extend(others.clone().map(|i| (map[i], -u)));
            lp.le.push((row, 0.0));
        }
        if let Some(l) = r.lower() {
            let mut row = vec![(map[r.target], -(1.0 - l))];
            row.extend(others.map(|i| (map[i], l)));
            lp.le.push((row, 0.0));
        }
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible { phase_one } => Err(Error::Solver { message: "polytope is empty".into(), residual: phase_one, best: None }),
        LpOutcome::Unbounded => Err(Error::Solver { message: "coordinate unbounded".into(), residual: f64::INFINITY, best: None }),
        LpOutcome::IterationLimit => Err(Error::Solver { message: "simplex pivot limit reached".into(), residual: f64::NAN, best: None }),
    }
}

/// Greedy maximum of `sum_y p(y) v(y)` over `lo <= p <= hi`, `sum p = 1`.
fn box_max(conf: &ConfidenceSet, h: usize, s: usize, a: usize, v: &[f64], order: &mut Vec<usize>) -> f64 {
    let ns = v.len();
    let mut p = vec![0.0; ns];
    let mut left = 1.0;
    for (y, py) in p.iter_mut().enumerate() {
        *py = conf.bounds(h, s, a, y).0;
        left -= *py;
    }
    order.clear();
    order.extend(0..ns);
    order.sort_by(|&i, &j| v[j].total_cmp(&v[i]).then(i.cmp(&j)));
    for &y in order.iter() {
        if left <= 0.0 {
            break;
        }
        let room = conf.bounds(h, s, a, y).1 - p[y];
        let add = room.min(left).max(0.0);
        p[y] += add;
        left -= add;
    }
    p.iter().zip(v).map(|(p, v)| p * v).sum()
}

/// Weight of action (or sub-policy) `x` at `(h, c, s)`; `None` maximizes.
type Weight<'a> = Option<&'a dyn ConditionedPolicy>;

fn reach(space: &ComSpace, conf: &ConfidenceSet, k: Coord, pol: Weight) -> Result<f64> {
    check_coord(space, k)?;
    let sh = &space.shape;
    let conds = &space.conds;
    let ns = sh.s;
    let w = |h: usize, c: usize, s: usize, x: usize| pol.map_or(1.0, |p| p.prob(h, c, s, x));
    // stochastic backward step shared by both modes
    let stoch = |h: usize, c: usize, next: &[f64]| -> Vec<f64> {
        let mut order = Vec::with_capacity(ns);
        (0..ns)
            .map(|x| {
                let vals = (0..sh.a).map(|a| w(h, c, x, a) * box_max(conf, h, x, a, next, &mut order));
                match pol {
                    None => vals.fold(0.0, f64::max),
                    Some(_) => vals.sum(),
                }
            })
            .collect()
    };
    let mut v = vec![0.0; ns];
    match conds.mode {
        ConditionMode::ActionBased => {
            let trip = conds.triplets(k.h, k.c).to_vec();
            let mut chain = vec![0usize; k.h + 1];
            let mut ti = 0;
            for g in 0..k.h {
                chain[g + 1] = if sh.is_adv(g) {
                    let t = trip[ti];
                    ti += 1;
                    match conds.extend(g, chain[g], t.s, t.a, t.s2) {
                        Some(c) => c,
                        None => return Ok(0.0),
                    }
                } else {
                    chain[g]
                };
            }
            v[k.s] = w(k.h, k.c, k.s, k.x);
            let mut ti = trip.len();
            for g in (0..k.h).rev() {
                if sh.is_adv(g) {
                    ti -= 1;
                    let t = trip[ti];
                    let mut nv = vec![0.0; ns];
                    nv[t.s] = w(g, chain[g], t.s, t.a) * v[t.s2];
                    v = nv;
                } else {
                    v = stoch(g, chain[g], &v);
                }
            }
        }
        ConditionMode::SubPolicy => {
            let (h1, h2) = conds.block().unwrap();
            v[k.s] = w(k.h, k.c, k.s, k.x);
            let mut g = k.h;
            if k.h >= h2 {
                let (start, sigma, end) = conds.decode_block(k.c);
                if k.h == h2 && k.s != end {
                    return Ok(0.0);
                }
                for g2 in (h2..k.h).rev() {
                    v = stoch(g2, k.c, &v);
                }
                let mut nv = vec![0.0; ns];
                nv[start] = w(h1, 0, start, sigma) * v[end];
                v = nv;
                g = h1;
            }
            for g2 in (0..g).rev() {
                v = stoch(g2, 0, &v);
            }
        }
    }
    Ok(v[sh.s_init])
}

/// Exact coordinate maximum by dynamic programming.
pub fn max_coordinate_dp(poly: &ComPolytopeSpec, k: Coord) -> Result<f64> {
    reach(&poly.space, &poly.conf, k, None)
}

/// Largest `mu_h(s, x, c)` over polytope members whose policy is `policy`.
pub fn policy_upper(space: &ComSpace, conf: &ConfidenceSet, policy: &dyn ConditionedPolicy, k: Coord) -> Result<f64> {
    reach(space, conf, k, Some(policy))
}
