//! Linear description of the COM polytope.
//!
//! Equalities are stored as sparse `±1` rows (flow) or all-ones rows (unit
//! mass). Each interval row bounds one `s'`-resolved entry against the
//! total of its group: `|x_t - T pbar| <= T eps` with `T` the group sum.

use std::sync::Arc;

use super::ConfidenceSet;
use crate::conditions::{Com, ComSpace, ConditionMode, StepKind};
use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Flow,
    Mass,
}

/// `sum_i coef_i x_idx_i = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub kind: RowKind,
    pub idx: Vec<usize>,
    pub coef: Vec<f64>,
    pub rhs: f64,
}

impl SparseRow {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.coef).map(|(&i, c)| c * x[i]).sum()
    }
}

/// `|x_target - T pbar| <= T eps`, `T = sum_{i in group} x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub target: usize,
    pub group: std::ops::Range<usize>,
    pub pbar: f64,
    pub eps: f64,
}

impl IntervalRow {
    /// Upper multiplier `pbar + eps`, or `None` when it is at least one.
    pub fn upper(&self) -> Option<f64> {
        let u = self.pbar + self.eps;
        (u < 1.0).then_some(u)
    }

    /// Lower multiplier `pbar - eps`, or `None` when it is at most zero.
    pub fn lower(&self) -> Option<f64> {
        let l = self.pbar - self.eps;
        (l > 0.0).then_some(l)
    }

    /// Amount by which `x` breaks the row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let t: f64 = x[self.group.clone()].iter().sum();
        ((x[self.target] - t * self.pbar).abs() - t * self.eps).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ComPolytopeSpec {
    pub space: Arc<ComSpace>,
    pub eqs: Vec<SparseRow>,
    pub intervals: Vec<IntervalRow>,
    /// Variables pinned to zero by the zeroing equalities.
    pub zeros: Vec<usize>,
    /// Zeroing equalities closed under the flow rows.
    pub forced_zero: Vec<bool>,
    pub conf: ConfidenceSet,
}

impl ComPolytopeSpec {
    pub fn n_vars(&self) -> usize {
        self.space.layout.total
    }

    pub fn n_free(&self) -> usize {
        self.forced_zero.iter().filter(|&&z| !z).count()
    }
}

fn check_dims(space: &ComSpace, conf: &ConfidenceSet) -> Result<()> {
    let sh = &space.shape;
    let k = &conf.pbar;
    if k.s != sh.s || k.a != sh.a || k.steps != sh.n_transitions() || conf.eps.len() != k.p.len() {
        return config("confidence set dimensions do not match the shape");
    }
    Ok(())
}

/// Polytope for an action-based condition space.
pub fn build_action_polytope(space: &Arc<ComSpace>, conf: &ConfidenceSet) -> Result<ComPolytopeSpec> {
    if space.conds.mode != ConditionMode::ActionBased {
        return config("action-based polytope needs an action-based condition set");
    }
    build_polytope(space, conf)
}

/// Polytope for a sub-policy condition space.
pub fn build_subpolicy_polytope(space: &Arc<ComSpace>, conf: &ConfidenceSet) -> Result<ComPolytopeSpec> {
    if space.conds.mode != ConditionMode::SubPolicy {
        return config("sub-policy polytope needs a sub-policy condition set");
    }
    if !space.shape.adv_consecutive() {
        return config("sub-policy polytope requires consecutive adversarial steps");
    }
    build_polytope(space, conf)
}

/// Builds either polytope; the rows follow from the step kinds of the space.
pub fn build_polytope(space: &Arc<ComSpace>, conf: &ConfidenceSet) -> Result<ComPolytopeSpec> {
    check_dims(space, conf)?;
    let sh = &space.shape;
    let lay = &space.layout;
    let conds = &space.conds;
    let (ns, na) = (sh.s, sh.a);
    let mut eqs = Vec::new();
    let mut intervals = Vec::new();
    let mut zeros = Vec::new();

    // all entries of mu_{h}(s, ., ., c)
    let outflow = |h: usize, c: usize, s: usize, idx: &mut Vec<usize>| {
        let st = &lay.steps[h];
        let b = lay.base(h, c, s, 0);
        idx.extend(b..b + st.n_choice * st.resolve);
    };

    for h in 0..sh.h {
        let st = lay.steps[h];
        match st.kind {
            StepKind::Stochastic => {
                for c in 0..st.n_cond {
                    for s2 in 0..ns {
                        let mut idx = Vec::new();
                        outflow(h + 1, c, s2, &mut idx);
                        let np = idx.len();
                        for s in 0..ns {
                            for a in 0..na {
                                idx.push(lay.index(h, c, s, a, s2));
                            }
                        }
                        let coef = (0..idx.len()).map(|i| if i < np { 1.0 } else { -1.0 }).collect();
                        eqs.push(SparseRow { kind: RowKind::Flow, idx, coef, rhs: 0.0 });
                    }
                }
                for c in 0..st.n_cond {
                    for s in 0..ns {
                        for a in 0..na {
                            let b = lay.base(h, c, s, a);
                            for s2 in 0..ns {
                                let k = conf.pbar.idx(h, s, a, s2);
                                intervals.push(IntervalRow { target: b + s2, group: b..b + ns, pbar: conf.pbar.p[k], eps: conf.eps[k] });
                            }
                        }
                    }
                }
            }
            StepKind::Adversarial if h + 1 < sh.h => {
                for c in 0..st.n_cond {
                    for s in 0..ns {
                        for a in 0..na {
                            for s2 in 0..ns {
                                if let Some(c2) = conds.extend(h, c, s, a, s2) {
                                    let mut idx = Vec::new();
                                    outflow(h + 1, c2, s2, &mut idx);
                                    let np = idx.len();
                                    idx.push(lay.index(h, c, s, a, 0));
                                    let coef = (0..idx.len()).map(|i| if i < np { 1.0 } else { -1.0 }).collect();
                                    eqs.push(SparseRow { kind: RowKind::Flow, idx, coef, rhs: 0.0 });
                                }
                            }
                        }
                    }
                }
            }
            StepKind::SubPolicyChoice => {
                let (_, h2) = conds.block().unwrap();
                if h2 < sh.h {
                    for s in 0..ns {
                        for sigma in 0..st.n_choice {
                            for s2 in 0..ns {
                                let mut idx = Vec::new();
                                outflow(h2, conds.block_id(s, sigma, s2), s2, &mut idx);
                                let np = idx.len();
                                idx.push(lay.index(h, 0, s, sigma, 0));
                                let coef = (0..idx.len()).map(|i| if i < np { 1.0 } else { -1.0 }).collect();
                                eqs.push(SparseRow { kind: RowKind::Flow, idx, coef, rhs: 0.0 });
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        if st.kind != StepKind::BlockInterior {
            for c in 0..st.n_cond {
                if let Some(fs) = conds.feasible_state(h, c) {
                    for s in (0..ns).filter(|&s| s != fs) {
                        outflow(h, c, s, &mut zeros);
                    }
                }
            }
        }
    }
    let r0 = lay.step_range(0);
    eqs.push(SparseRow { kind: RowKind::Mass, idx: r0.clone().collect(), coef: vec![1.0; r0.len()], rhs: 1.0 });
    for s in (0..ns).filter(|&s| s != sh.s_init) {
        outflow(0, 0, s, &mut zeros);
    }
    zeros.sort_unstable();
    zeros.dedup();
    if zeros.iter().any(|&z| z >= lay.total) {
        return config("zeroing row outside the variable range");
    }
    let forced_zero = close_zeros(lay.total, &zeros, &eqs, &intervals);
    Ok(ComPolytopeSpec { space: space.clone(), eqs, intervals, zeros, forced_zero, conf: conf.clone() })
}

/// Propagates explicit zeros: a flow row with one side all zero pins the
/// other side; an interval row with a positive lower multiplier and a zero
/// target pins its group, and one with an upper multiplier below one pins a
/// target whose group is otherwise zero.
fn close_zeros(n: usize, zeros: &[usize], eqs: &[SparseRow], intervals: &[IntervalRow]) -> Vec<bool> {
    let mut z = vec![false; n];
    for &i in zeros {
        z[i] = true;
    }
    loop {
        let mut changed = false;
        for r in eqs.iter().filter(|r| r.kind == RowKind::Flow) {
            let pos_zero = r.idx.iter().zip(&r.coef).filter(|(_, &c)| c > 0.0).all(|(&i, _)| z[i]);
            let neg_zero = r.idx.iter().zip(&r.coef).filter(|(_, &c)| c < 0.0).all(|(&i, _)| z[i]);
            if pos_zero || neg_zero {
                for &i in &r.idx {
                    if !z[i] {
                        z[i] = true;
                        changed = true;
                    }
                }
            }
        }
        for r in intervals {
            if !z[r.target] && r.upper().is_some() && r.group.clone().all(|i| i == r.target || z[i]) {
                z[r.target] = true;
                changed = true;
            }
            if z[r.target] && r.lower().is_some() {
                for i in r.group.clone() {
                    if !z[i] {
                        z[i] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return z;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReport {
    pub max_eq_residual: f64,
    pub max_interval_violation: f64,
    pub max_zero_violation: f64,
    pub min_entry: f64,
    pub member: bool,
}

impl MembershipReport {
    pub fn worst(&self) -> f64 {
        self.max_eq_residual.max(self.max_interval_violation).max(self.max_zero_violation).max(-self.min_entry)
    }
}

pub fn membership_check(poly: &ComPolytopeSpec, com: &Com, tol: f64) -> Result<MembershipReport> {
    if com.space.layout != poly.space.layout {
        return config("COM layout does not match the polytope");
    }
    Ok(membership_of(poly, &com.v, tol))
}

/// Same as `membership_check` on a raw vector.
pub fn membership_of(poly: &ComPolytopeSpec, x: &[f64], tol: f64) -> MembershipReport {
    let max_eq_residual = poly.eqs.iter().map(|r| (r.eval(x) - r.rhs).abs()).fold(0.0, f64::max);
    let max_interval_violation = poly.intervals.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
    let max_zero_violation = poly.zeros.iter().map(|&i| x[i].abs()).fold(0.0, f64::max);
    let min_entry = x.iter().copied().fold(f64::INFINITY, f64::min);
    let min_entry = if min_entry.is_finite() { min_entry } else { 0.0 };
    let member = max_eq_residual <= tol && max_interval_violation <= tol && max_zero_violation <= tol && min_entry >= -tol;
    MembershipReport { max_eq_residual, max_interval_violation, max_zero_violation, min_entry, member }
}
