//! Dense storage for conditioned occupancy measures.
//!
//! Entry `(h, c, s, x, s')` lives at
//! `offset[h] + ((c * S + s) * n_choice + x) * resolve + s'`, where `x` is an
//! action (or a sub-policy at the block start) and `resolve` is `S` on
//! stochastic steps and 1 elsewhere.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConditionMode, ConditionSet, ConditionedPolicy};
use crate::error::{config, contract, Result};
use crate::mdp::occupancy::VisitTable;
use crate::mdp::{MdpShape, TransitionKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Stationary transition; entries resolved by next state.
    Stochastic,
    /// Adversarial transition; the condition records its outcome.
    Adversarial,
    /// Last step, no transition.
    Terminal,
    /// Start of a sub-policy block; choices are sub-policies.
    SubPolicyChoice,
    /// Inside a sub-policy block; no entries.
    BlockInterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLayout {
    pub kind: StepKind,
    pub n_cond: usize,
    pub n_choice: usize,
    pub resolve: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComLayout {
    pub s: usize,
    pub a: usize,
    pub steps: Vec<StepLayout>,
    pub total: usize,
}

impl ComLayout {
    pub fn new(shape: &MdpShape, conds: &ConditionSet) -> Self {
        let mut steps = Vec::with_capacity(shape.h);
        let mut offset = 0;
        let block = conds.block();
        for h in 0..shape.h {
            let kind = match (conds.mode, block) {
                (ConditionMode::SubPolicy, Some((h1, _))) if h == h1 => StepKind::SubPolicyChoice,
                (ConditionMode::SubPolicy, Some((h1, h2))) if h > h1 && h < h2 => StepKind::BlockInterior,
                (ConditionMode::ActionBased, _) if shape.is_adv(h) => StepKind::Adversarial,
                _ if h + 1 == shape.h => StepKind::Terminal,
                _ => StepKind::Stochastic,
            };
            let n_cond = conds.count(h);
            let n_choice = match kind {
                StepKind::SubPolicyChoice => conds.subpolicies().unwrap().count(),
                _ => shape.a,
            };
            let resolve = if kind == StepKind::Stochastic { shape.s } else { 1 };
            let len = if kind == StepKind::BlockInterior { 0 } else { n_cond * shape.s * n_choice * resolve };
            steps.push(StepLayout { kind, n_cond, n_choice, resolve, offset, len });
            offset += len;
        }
        Self { s: shape.s, a: shape.a, steps, total: offset }
    }

    #[inline]
    pub fn base(&self, h: usize, c: usize, s: usize, x: usize) -> usize {
        let st = &self.steps[h];
        st.offset + ((c * self.s + s) * st.n_choice + x) * st.resolve
    }

    #[inline]
    pub fn index(&self, h: usize, c: usize, s: usize, x: usize, s2: usize) -> usize {
        self.base(h, c, s, x) + s2
    }

    /// Inverse of `index`: `(h, c, s, x, s')`.
    pub fn decode(&self, i: usize) -> (usize, usize, usize, usize, usize) {
        for (h, st) in self.steps.iter().enumerate() {
            if i >= st.offset && i < st.offset + st.len {
                let mut r = i - st.offset;
                let s2 = r % st.resolve;
                r /= st.resolve;
                let x = r % st.n_choice;
                r /= st.n_choice;
                let s = r % self.s;
                let c = r / self.s;
                return (h, c, s, x, s2);
            }
        }
        panic!("index {i} outside layout of {} entries", self.total);
    }

    pub fn step_range(&self, h: usize) -> std::ops::Range<usize> {
        let st = &self.steps[h];
        st.offset..st.offset + st.len
    }
}

/// Shape, condition set and layout shared by every measure and policy on
/// the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct ComSpace {
    pub shape: MdpShape,
    pub conds: ConditionSet,
    pub layout: ComLayout,
}

impl ComSpace {
    pub fn new(shape: &MdpShape, mode: ConditionMode) -> Result<Arc<Self>> {
        let conds = ConditionSet::enumerate(shape, mode)?;
        Ok(Self::from_conditions(shape, conds))
    }

    pub fn from_conditions(shape: &MdpShape, conds: ConditionSet) -> Arc<Self> {
        let layout = ComLayout::new(shape, &conds);
        Arc::new(Self { shape: shape.clone(), conds, layout })
    }

    pub fn kind(&self, h: usize) -> StepKind {
        self.layout.steps[h].kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Com {
    pub space: Arc<ComSpace>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComJson {
    pub layout: ComLayout,
    pub values: Vec<f64>,
}

impl Com {
    pub fn zeros(space: &Arc<ComSpace>) -> Self {
        Self { space: space.clone(), v: vec![0.0; space.layout.total] }
    }

    pub fn layout(&self) -> &ComLayout {
        &self.space.layout
    }

    #[inline]
    pub fn get(&self, h: usize, c: usize, s: usize, x: usize, s2: usize) -> f64 {
        self.v[self.space.layout.index(h, c, s, x, s2)]
    }

    /// `mu_h(s, x, c)`, summed over next states on stochastic steps.
    pub fn marginal(&self, h: usize, c: usize, s: usize, x: usize) -> f64 {
        let b = self.space.layout.base(h, c, s, x);
        self.v[b..b + self.space.layout.steps[h].resolve].iter().sum()
    }

    pub fn step_mass(&self, h: usize) -> f64 {
        self.v[self.space.layout.step_range(h)].iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> ComJson {
        ComJson { layout: self.space.layout.clone(), values: self.v.clone() }
    }

    pub fn from_json(space: &Arc<ComSpace>, j: &ComJson) -> Result<Self> {
        if j.layout != space.layout || j.values.len() != space.layout.total {
            return config("COM layout does not match the space");
        }
        Ok(Self { space: space.clone(), v: j.values.clone() })
    }
}

/// Conditioned occupancy measure of `policy`: stationary transitions are
/// followed with their probabilities, adversarial outcomes recorded in the
/// condition are taken with probability one.
pub fn com_from_policy(space: &Arc<ComSpace>, stationary: &TransitionKernel, policy: &dyn ConditionedPolicy) -> Result<Com> {
    let shape = &space.shape;
    let lay = &space.layout;
    if stationary.s != shape.s || stationary.a != shape.a || stationary.steps != shape.n_transitions() {
        return config("kernel dimensions do not match shape");
    }
    let ns = shape.s;
    let mut com = Com::zeros(space);
    let mut w: Vec<Vec<f64>> = lay.steps.iter().map(|st| vec![0.0; st.n_cond * ns]).collect();
    w[0][shape.s_init] = 1.0;
    let block = space.conds.block();
    for h in 0..shape.h {
        let st = lay.steps[h];
        if st.kind == StepKind::BlockInterior {
            continue;
        }
        for c in 0..st.n_cond {
            for s in 0..ns {
                let ws = w[h][c * ns + s];
                if ws == 0.0 {
                    continue;
                }
                let mut total = 0.0;
                for x in 0..st.n_choice {
                    let p = policy.prob(h, c, s, x);
                    if !(p >= 0.0) {
                        return contract(format!("negative policy mass at step {}", h + 1));
                    }
                    total += p;
                    let m = ws * p;
                    if m == 0.0 {
                        continue;
                    }
                    match st.kind {
                        StepKind::Stochastic => {
                            for (s2, &pr) in stationary.row(h, s, x).iter().enumerate() {
                                com.v[lay.index(h, c, s, x, s2)] = m * pr;
                                w[h + 1][c * ns + s2] += m * pr;
                            }
                        }
                        StepKind::Adversarial => {
                            com.v[lay.index(h, c, s, x, 0)] = m;
                            for s2 in 0..ns {
                                match space.conds.extend(h, c, s, x, s2) {
                                    Some(c2) => w[h + 1][c2 * ns + s2] += m,
                                    None => return contract(format!("mass on inconsistent condition at step {}", h + 1)),
                                }
                            }
                        }
                        StepKind::Terminal => com.v[lay.index(h, c, s, x, 0)] = m,
                        StepKind::SubPolicyChoice => {
                            com.v[lay.index(h, 0, s, x, 0)] = m;
                            let h2 = block.unwrap().1;
                            for s2 in 0..ns {
                                let c2 = space.conds.block_id(s, x, s2);
                                w[h2][c2 * ns + s2] += m;
                            }
                        }
                        StepKind::BlockInterior => unreachable!(),
                    }
                }
                if (total - 1.0).abs() > 1e-12 {
                    return contract(format!("policy at step {} sums to {total}", h + 1));
                }
            }
        }
    }
    Ok(com)
}

/// Occupancy measure under `kernel`: each conditioned entry weighted by the
/// probability that its condition is realized.
pub fn com_to_om(com: &Com, kernel: &TransitionKernel) -> VisitTable {
    let space = &com.space;
    let shape = &space.shape;
    let lay = &space.layout;
    let (ns, na) = (shape.s, shape.a);
    let mut q = VisitTable::for_shape(shape);
    for h in 0..shape.h {
        let st = lay.steps[h];
        match st.kind {
            StepKind::BlockInterior => continue,
            StepKind::SubPolicyChoice => {
                let sp = space.conds.subpolicies().unwrap();
                for s0 in 0..ns {
                    for sigma in 0..st.n_choice {
                        let m = com.marginal(h, 0, s0, sigma);
                        if m == 0.0 {
                            continue;
                        }
                        let mut d = vec![0.0; ns];
                        d[s0] = m;
                        for j in 0..sp.len() {
                            let hb = sp.h1 + j;
                            let mut next = vec![0.0; ns];
                            for x in 0..ns {
                                if d[x] == 0.0 {
                                    continue;
                                }
                                let a = sp.action(sigma, j, x);
                                let i = q.idx(hb, x, a);
                                q.l[i] += d[x];
                                for (y, p) in kernel.row(hb, x, a).iter().enumerate() {
                                    next[y] += d[x] * p;
                                }
                            }
                            d = next;
                        }
                    }
                }
            }
            _ => {
                let rho = super::rho_table(&space.conds, h, kernel);
                for c in 0..st.n_cond {
                    if rho[c] == 0.0 {
                        continue;
                    }
                    for s in 0..ns {
                        for a in 0..na {
                            let i = q.idx(h, s, a);
                            q.l[i] += com.marginal(h, c, s, a) * rho[c];
                        }
                    }
                }
            }
        }
    }
    q
}
