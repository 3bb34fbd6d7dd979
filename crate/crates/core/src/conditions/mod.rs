//! Conditions over adversarial-step outcomes and the conditioned occupancy
//! measures built on them.
//!
//! In action-based mode a condition at step `h` lists one `(s, a, s')`
//! triplet per adversarial step before `h`. In sub-policy mode the whole
//! adversarial block is summarized by `(start state, sub-policy, end state)`.

pub mod com;
pub mod policy;
pub mod rho;
pub mod subpolicy;

pub use com::{com_from_policy, com_to_om, Com, ComLayout, ComSpace, StepKind, StepLayout};
pub use policy::{ConditionedPolicy, TablePolicy};
pub use rho::{rho, rho_table};
pub use subpolicy::{matched_subpolicies, rho_subpolicy, rho_subpolicy_dist, SubPolicySet};

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::mdp::{MdpShape, Trajectory};

pub const DEFAULT_MAX_ENTRIES: usize = 10_000_000;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionMode {
    ActionBased,
    SubPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub step: usize,
    pub s: usize,
    pub a: usize,
    pub s2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    Empty,
    Triplets(Vec<Triplet>),
    Block { start: usize, sigma: usize, end: usize },
}

impl Condition {
    /// Triplets must chain across consecutive adversarial steps.
    pub fn is_consistent(&self) -> bool {
        match self {
            Condition::Triplets(ts) => ts.windows(2).all(|w| w[1].step != w[0].step + 1 || w[0].s2 == w[1].s),
            _ => true,
        }
    }
}

/// Per-step condition families with dense ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSet {
    pub mode: ConditionMode,
    pub s: usize,
    pub a: usize,
    pub h: usize,
    adv: Vec<usize>,
    /// Action-based: triplet lists per step, in id order.
    conds: Vec<Vec<Vec<Triplet>>>,
    /// Action-based, adversarial steps: extension ids into step `h + 1`.
    ext: Vec<Option<Vec<u32>>>,
    subpolicies: Option<SubPolicySet>,
}

impl ConditionSet {
    pub fn enumerate(shape: &MdpShape, mode: ConditionMode) -> Result<Self> {
        Self::enumerate_capped(shape, mode, DEFAULT_MAX_ENTRIES)
    }

    pub fn enumerate_capped(shape: &MdpShape, mode: ConditionMode, max_entries: usize) -> Result<Self> {
        shape.validate()?;
        match mode {
            ConditionMode::ActionBased => Self::action_based(shape, max_entries),
            ConditionMode::SubPolicy => Self::sub_policy(shape, max_entries),
        }
    }

    fn action_based(shape: &MdpShape, max_entries: usize) -> Result<Self> {
        let (ns, na) = (shape.s, shape.a);
        let sas = ns * na * ns;
        let mut conds: Vec<Vec<Vec<Triplet>>> = vec![vec![Vec::new()]];
        let mut ext = Vec::with_capacity(shape.h);
        for h in 0..shape.h {
            if h + 1 == shape.h {
                ext.push(None);
                break;
            }
            let cur = &conds[h];
            if !shape.is_adv(h) {
                ext.push(None);
                let same = cur.clone();
                conds.push(same);
                continue;
            }
            let prev_adv = h > 0 && shape.is_adv(h - 1);
            let mut next = Vec::new();
            let mut table = vec![NONE; cur.len() * sas];
            for (cid, c) in cur.iter().enumerate() {
                for s in 0..ns {
                    if prev_adv {
                        let last = c.last().expect("adversarial predecessor leaves a triplet");
                        if last.s2 != s {
                            continue;
                        }
                    }
                    for a in 0..na {
                        for s2 in 0..ns {
                            let mut nc = c.clone();
                            nc.push(Triplet { step: h, s, a, s2 });
                            table[cid * sas + (s * na + a) * ns + s2] = next.len() as u32;
                            next.push(nc);
                        }
                    }
                }
            }
            let entries = next.len().saturating_mul(sas);
            if entries > max_entries {
                return config(format!(
                    "condition set at step {} needs {entries} entries (cap {max_entries})",
                    h + 2
                ));
            }
            ext.push(Some(table));
            conds.push(next);
        }
        Ok(Self { mode: ConditionMode::ActionBased, s: ns, a: na, h: shape.h, adv: shape.adv_steps.clone(), conds, ext, subpolicies: None })
    }

    fn sub_policy(shape: &MdpShape, max_entries: usize) -> Result<Self> {
        if shape.adv_steps.is_empty() {
            return config("sub-policy mode needs at least one adversarial step");
        }
        if !shape.adv_consecutive() {
            return config("sub-policy mode requires consecutive adversarial steps");
        }
        let h1 = shape.adv_steps[0];
        let h2 = *shape.adv_steps.last().unwrap() + 1;
        let set = SubPolicySet::new(shape.s, shape.a, h1, h2, max_entries)?;
        let entries = shape.s * shape.s * set.count() * shape.s * shape.a * shape.s;
        if entries > max_entries {
            return config(format!("sub-policy conditions need {entries} entries (cap {max_entries})"));
        }
        Ok(Self {
            mode: ConditionMode::SubPolicy,
            s: shape.s,
            a: shape.a,
            h: shape.h,
            adv: shape.adv_steps.clone(),
            conds: Vec::new(),
            ext: Vec::new(),
            subpolicies: Some(set),
        })
    }

    pub fn adv_steps(&self) -> &[usize] {
        &self.adv
    }

    pub fn is_adv(&self, h: usize) -> bool {
        self.adv.binary_search(&h).is_ok()
    }

    pub fn subpolicies(&self) -> Option<&SubPolicySet> {
        self.subpolicies.as_ref()
    }

    /// `(h1, h2)`: first adversarial step and the step after the block.
    pub fn block(&self) -> Option<(usize, usize)> {
        self.subpolicies.as_ref().map(|sp| (sp.h1, sp.h2))
    }

    /// Number of conditions at step `h`; zero for block-interior steps.
    pub fn count(&self, h: usize) -> usize {
        match self.mode {
            ConditionMode::ActionBased => self.conds[h].len(),
            ConditionMode::SubPolicy => {
                let sp = self.subpolicies.as_ref().unwrap();
                if h <= sp.h1 {
                    1
                } else if h < sp.h2 {
                    0
                } else {
                    self.s * sp.count() * self.s
                }
            }
        }
    }

    /// Number of adversarial steps recorded by conditions at step `h`.
    pub fn lambda_at(&self, h: usize) -> usize {
        self.adv.iter().filter(|&&x| x < h).count()
    }

    pub fn condition(&self, h: usize, id: usize) -> Condition {
        match self.mode {
            ConditionMode::ActionBased => {
                let ts = &self.conds[h][id];
                if ts.is_empty() {
                    Condition::Empty
                } else {
                    Condition::Triplets(ts.clone())
                }
            }
            ConditionMode::SubPolicy => {
                let sp = self.subpolicies.as_ref().unwrap();
                if h < sp.h2 {
                    Condition::Empty
                } else {
                    let (start, sigma, end) = self.decode_block(id);
                    Condition::Block { start, sigma, end }
                }
            }
        }
    }

    pub fn triplets(&self, h: usize, id: usize) -> &[Triplet] {
        &self.conds[h][id]
    }

    pub fn id_of(&self, h: usize, c: &Condition) -> Option<usize> {
        match (self.mode, c) {
            (ConditionMode::ActionBased, Condition::Empty) => (self.conds[h].len() == 1 && self.conds[h][0].is_empty()).then_some(0),
            (ConditionMode::ActionBased, Condition::Triplets(ts)) => self.conds[h].iter().position(|x| x == ts),
            (ConditionMode::SubPolicy, Condition::Empty) => (self.count(h) == 1).then_some(0),
            (ConditionMode::SubPolicy, Condition::Block { start, sigma, end }) => {
                let sp = self.subpolicies.as_ref().unwrap();
                (h >= sp.h2 && *start < self.s && *end < self.s && *sigma < sp.count()).then(|| self.block_id(*start, *sigma, *end))
            }
            _ => None,
        }
    }

    pub fn block_id(&self, start: usize, sigma: usize, end: usize) -> usize {
        let n = self.subpolicies.as_ref().map(|sp| sp.count()).unwrap_or(1);
        (start * n + sigma) * self.s + end
    }

    pub fn decode_block(&self, id: usize) -> (usize, usize, usize) {
        let n = self.subpolicies.as_ref().map(|sp| sp.count()).unwrap_or(1);
        let end = id % self.s;
        let rest = id / self.s;
        (rest / n, rest % n, end)
    }

    /// Condition id at `h + 1` after `(s, a, s2)` at adversarial step `h`.
    pub fn extend(&self, h: usize, id: usize, s: usize, a: usize, s2: usize) -> Option<usize> {
        let table = self.ext.get(h)?.as_ref()?;
        let sas = self.s * self.a * self.s;
        let v = table[id * sas + (s * self.a + a) * self.s + s2];
        (v != NONE).then_some(v as usize)
    }

    /// The only state a condition allows at step `h`, when it pins one.
    pub fn feasible_state(&self, h: usize, id: usize) -> Option<usize> {
        match self.mode {
            ConditionMode::ActionBased => {
                if h > 0 && self.is_adv(h - 1) {
                    self.conds[h][id].last().map(|t| t.s2)
                } else {
                    None
                }
            }
            ConditionMode::SubPolicy => {
                let sp = self.subpolicies.as_ref().unwrap();
                (h == sp.h2).then(|| self.decode_block(id).2)
            }
        }
    }

    /// Condition ids along a realized trajectory, one per step (`usize::MAX`
    /// for block-interior steps in sub-policy mode).
    pub fn trajectory_conditions(&self, tr: &Trajectory) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.h);
        match self.mode {
            ConditionMode::ActionBased => {
                let mut c = 0;
                for h in 0..self.h {
                    out.push(c);
                    if h + 1 < self.h && self.is_adv(h) {
                        c = self.extend(h, c, tr.states[h], tr.actions[h], tr.states[h + 1]).unwrap_or(usize::MAX);
                    }
                }
            }
            ConditionMode::SubPolicy => {
                let (h1, h2) = self.block().unwrap();
                let c = if h2 < self.h { self.block_id(tr.states[h1], tr.tags[h1], tr.states[h2]) } else { usize::MAX };
                for h in 0..self.h {
                    out.push(if h <= h1 {
                        0
                    } else if h < h2 {
                        usize::MAX
                    } else {
                        c
                    });
                }
            }
        }
        out
    }
}

/// Convenience wrapper matching the operation name used by callers.
pub fn enumerate_conditions(shape: &MdpShape, mode: ConditionMode) -> Result<ConditionSet> {
    ConditionSet::enumerate(shape, mode)
}
