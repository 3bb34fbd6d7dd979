//! Condition-dependent policies stored as dense tables.

use std::sync::Arc;

use super::{Com, ComSpace, StepKind};
use crate::mdp::{Branch, MarkovPolicy, Strategy};

/// Distribution over choices at `(h, condition, state)`.
pub trait ConditionedPolicy {
    fn prob(&self, h: usize, c: usize, s: usize, x: usize) -> f64;
}

impl ConditionedPolicy for MarkovPolicy {
    fn prob(&self, h: usize, _c: usize, s: usize, x: usize) -> f64 {
        MarkovPolicy::prob(self, h, s, x)
    }
}

/// Mass at or below this is treated as an unreachable row.
pub const ROW_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TablePolicy {
    pub space: Arc<ComSpace>,
    offsets: Vec<usize>,
    pub p: Vec<f64>,
}

impl TablePolicy {
    fn offsets(space: &ComSpace) -> (Vec<usize>, usize) {
        let mut offs = Vec::with_capacity(space.layout.steps.len());
        let mut acc = 0;
        for st in &space.layout.steps {
            offs.push(acc);
            if st.kind != StepKind::BlockInterior {
                acc += st.n_cond * space.shape.s * st.n_choice;
            }
        }
        (offs, acc)
    }

    pub fn uniform(space: &Arc<ComSpace>) -> Self {
        let (offsets, total) = Self::offsets(space);
        let mut p = vec![0.0; total];
        for (h, st) in space.layout.steps.iter().enumerate() {
            if st.kind == StepKind::BlockInterior {
                continue;
            }
            let n = st.n_cond * space.shape.s * st.n_choice;
            p[offsets[h]..offsets[h] + n].fill(1.0 / st.n_choice as f64);
        }
        Self { space: space.clone(), offsets, p }
    }

    /// `pi(x | s, c) = mu(s, x, c) / sum_x' mu(s, x', c)`, uniform when the
    /// row mass is at or below `ROW_FLOOR`.
    pub fn from_com(com: &Com) -> Self {
        let mut pol = Self::uniform(&com.space);
        let space = com.space.clone();
        let ns = space.shape.s;
        for (h, st) in space.layout.steps.iter().enumerate() {
            if st.kind == StepKind::BlockInterior {
                continue;
            }
            let mut row = vec![0.0; st.n_choice];
            for c in 0..st.n_cond {
                for s in 0..ns {
                    for (x, r) in row.iter_mut().enumerate() {
                        *r = com.marginal(h, c, s, x);
                    }
                    let tot: f64 = row.iter().sum();
                    if tot > ROW_FLOOR {
                        let i = pol.idx(h, c, s, 0);
                        for (x, r) in row.iter().enumerate() {
                            pol.p[i + x] = r / tot;
                        }
                    }
                }
            }
        }
        pol
    }

    #[inline]
    pub fn idx(&self, h: usize, c: usize, s: usize, x: usize) -> usize {
        let st = &self.space.layout.steps[h];
        self.offsets[h] + (c * self.space.shape.s + s) * st.n_choice + x
    }

    pub fn dist(&self, h: usize, c: usize, s: usize) -> &[f64] {
        let i = self.idx(h, c, s, 0);
        &self.p[i..i + self.space.layout.steps[h].n_choice]
    }

    fn n_sigma(&self) -> usize {
        self.space.conds.subpolicies().map(|sp| sp.count()).unwrap_or(1)
    }
}

impl ConditionedPolicy for TablePolicy {
    fn prob(&self, h: usize, c: usize, s: usize, x: usize) -> f64 {
        self.p[self.idx(h, c, s, x)]
    }
}

impl Strategy for TablePolicy {
    fn memory_size(&self, h: usize) -> usize {
        let st = &self.space.layout.steps[h];
        match st.kind {
            StepKind::BlockInterior => self.space.shape.s * self.n_sigma(),
            _ => st.n_cond,
        }
    }

    fn branches(&self, h: usize, s: usize, m: usize, out: &mut Vec<Branch>) {
        out.clear();
        let st = &self.space.layout.steps[h];
        match st.kind {
            StepKind::SubPolicyChoice => {
                let sp = self.space.conds.subpolicies().unwrap();
                for (sigma, &p) in self.dist(h, 0, s).iter().enumerate() {
                    if p > 0.0 {
                        out.push(Branch { prob: p, action: sp.action(sigma, 0, s), tag: sigma });
                    }
                }
            }
            StepKind::BlockInterior => {
                let sp = self.space.conds.subpolicies().unwrap();
                let sigma = m % self.n_sigma();
                out.push(Branch { prob: 1.0, action: sp.action(sigma, h - sp.h1, s), tag: sigma });
            }
            _ => {
                for (a, &p) in self.dist(h, m, s).iter().enumerate() {
                    if p > 0.0 {
                        out.push(Branch { prob: p, action: a, tag: a });
                    }
                }
            }
        }
    }

    fn advance(&self, h: usize, s: usize, m: usize, tag: usize, next: usize) -> usize {
        let ns = self.space.shape.s;
        match self.space.layout.steps[h].kind {
            StepKind::Adversarial => self.space.conds.extend(h, m, s, tag, next).unwrap_or(usize::MAX),
            StepKind::SubPolicyChoice => {
                let h2 = self.space.conds.block().unwrap().1;
                let cell = s * self.n_sigma() + tag;
                if h + 1 == h2 {
                    cell * ns + next
                } else {
                    cell
                }
            }
            StepKind::BlockInterior => {
                let h2 = self.space.conds.block().unwrap().1;
                if h + 1 == h2 {
                    m * ns + next
                } else {
                    m
                }
            }
            _ => m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::ConditionMode;
    use crate::mdp::MdpShape;

    #[test]
    fn ratio_and_fallback() {
        let sh = MdpShape::new(2, 2, 1, vec![], 0).unwrap();
        let sp = ComSpace::new(&sh, ConditionMode::ActionBased).unwrap();
        let mut com = Com::zeros(&sp);
        com.v[sp.layout.index(0, 0, 0, 0, 0)] = 0.3;
        com.v[sp.layout.index(0, 0, 0, 1, 0)] = 0.1;
        let pol = TablePolicy::from_com(&com);
        assert!((pol.dist(0, 0, 0)[0] - 0.75).abs() < 1e-15);
        assert!((pol.dist(0, 0, 0)[1] - 0.25).abs() < 1e-15);
        assert_eq!(pol.dist(0, 0, 1), &[0.5, 0.5]);
    }
}
