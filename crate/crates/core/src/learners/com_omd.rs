//! Mirror descent over conditioned occupancy measures, in action-based or
//! sub-policy mode.

use std::sync::Arc;

use super::{comsp, Feedback, Learner, ParamValue};
use crate::conditions::{com_from_policy, Com, ComSpace, ConditionMode, StepKind, TablePolicy};
use crate::confidence::{build_polytope, initial_com, ConfidenceSet, VisitCounts};
use crate::error::{config, contract, Result};
use crate::mdp::{MdpShape, Strategy, TransitionKernel, Trajectory};
use crate::solvers::{max_coordinate, omd_kl_step, policy_upper, Coord, SolverOptions};

/// How the estimator's optimistic denominator is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum UpperMode {
    /// Largest value over polytope members that follow the current policy.
    Policy,
    /// Largest value over the whole polytope.
    Polytope,
    /// The current policy's COM under this stationary kernel (oracle runs).
    Exact(TransitionKernel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComOmdParams {
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Planned number of episodes, used in the confidence radii.
    pub k_total: usize,
    pub upper: UpperMode,
    pub solver: SolverOptions,
}

pub struct ComOmd {
    pub shape: MdpShape,
    pub space: Arc<ComSpace>,
    pub params: ComOmdParams,
    counts: VisitCounts,
    /// Confidence set after the episodes seen so far.
    conf: ConfidenceSet,
    mu: Com,
    policy: TablePolicy,
    exact_com: Option<Com>,
    episodes: usize,
    last_estimate: Vec<f64>,
    last_matched: usize,
    param_log: Vec<ParamValue>,
}

impl ComOmd {
    pub fn new(shape: &MdpShape, mode: ConditionMode, params: ComOmdParams) -> Result<Self> {
        if !(params.gamma >= 0.0 && params.eta >= 0.0) {
            return config("eta and gamma must be nonnegative");
        }
        let space = ComSpace::new(shape, mode)?;
        let counts = VisitCounts::new(shape);
        let conf = ConfidenceSet::from_counts(&counts, params.k_total, params.delta)?;
        let mu = initial_com(&space);
        let policy = TablePolicy::from_com(&mu);
        if let UpperMode::Exact(k) = &params.upper {
            k.validate(shape)?;
        }
        let mut l = Self {
            shape: shape.clone(),
            space,
            params,
            counts,
            conf,
            mu,
            policy,
            exact_com: None,
            episodes: 0,
            last_estimate: Vec::new(),
            last_matched: 0,
            param_log: Vec::new(),
        };
        l.refresh_exact()?;
        Ok(l)
    }

    pub(crate) fn set_param_log(&mut self, p: Vec<ParamValue>) {
        self.param_log = p;
    }

    fn refresh_exact(&mut self) -> Result<()> {
        if let UpperMode::Exact(k) = &self.params.upper {
            self.exact_com = Some(com_from_policy(&self.space, k, &self.policy)?);
        }
        Ok(())
    }

    pub fn com(&self) -> &Com {
        &self.mu
    }

    pub fn policy(&self) -> &TablePolicy {
        &self.policy
    }

    pub fn confidence(&self) -> &ConfidenceSet {
        &self.conf
    }

    pub fn counts(&self) -> &VisitCounts {
        &self.counts
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    /// Estimate built in the last update, on the COM layout.
    pub fn last_estimate(&self) -> &[f64] {
        &self.last_estimate
    }

    /// Number of sub-policies matching the last block trajectory.
    pub fn last_matched(&self) -> usize {
        self.last_matched
    }

    /// Optimistic value of one coordinate over the current confidence set.
    pub fn upper(&self, k: Coord) -> Result<f64> {
        match &self.params.upper {
            UpperMode::Policy => policy_upper(&self.space, &self.conf, &self.policy, k),
            UpperMode::Polytope => {
                let poly = build_polytope(&self.space, &self.conf)?;
                max_coordinate(&poly, k, &self.params.solver)
            }
            UpperMode::Exact(_) => Ok(self.exact_com.as_ref().unwrap().marginal(k.h, k.c, k.s, k.x)),
        }
    }

    /// Loss estimate for one trajectory on the COM layout, without updating.
    pub fn estimate(&self, tr: &Trajectory) -> Result<Vec<f64>> {
        Ok(self.estimate_with_matches(tr)?.0)
    }

    fn estimate_with_matches(&self, tr: &Trajectory) -> Result<(Vec<f64>, usize)> {
        if tr.len() != self.shape.h {
            return config("trajectory length does not match the horizon");
        }
        match self.space.conds.mode {
            ConditionMode::ActionBased => {
                let lay = &self.space.layout;
                let mut est = vec![0.0; lay.total];
                let conds = self.space.conds.trajectory_conditions(tr);
                for h in 0..self.shape.h {
                    let k = Coord { h, c: conds[h], s: tr.states[h], x: tr.actions[h] };
                    if k.c == usize::MAX {
                        return contract(format!("trajectory condition at step {} is inconsistent", h + 1));
                    }
                    let d = self.upper(k)? + self.params.gamma;
                    if !(d > 0.0) {
                        return contract(format!("estimator denominator {d} at step {}", h + 1));
                    }
                    let b = lay.base(h, k.c, k.s, k.x);
                    est[b..b + lay.steps[h].resolve].fill(tr.losses[h] / d);
                }
                Ok((est, 0))
            }
            ConditionMode::SubPolicy => comsp::estimate(self, tr),
        }
    }

    pub(crate) fn gamma(&self) -> f64 {
        self.params.gamma
    }

    /// Applies one episode of feedback with the given per-step losses.
    pub fn update(&mut self, tr: &Trajectory) -> Result<()> {
        let (est, matched) = self.estimate_with_matches(tr)?;
        self.counts.update(tr);
        self.conf = ConfidenceSet::from_counts(&self.counts, self.params.k_total, self.params.delta)?;
        let poly = build_polytope(&self.space, &self.conf)?;
        let out = omd_kl_step(&poly, &self.mu, &est, self.params.eta, &self.params.solver)?;
        self.mu = out.com;
        self.policy = TablePolicy::from_com(&self.mu);
        self.refresh_exact()?;
        self.last_estimate = est;
        self.last_matched = matched;
        self.episodes += 1;
        Ok(())
    }

    /// Probability the current policy puts on `x` at `(h, c, s)`.
    pub fn act(&self, h: usize, c: usize, s: usize) -> &[f64] {
        debug_assert!(self.space.kind(h) != StepKind::BlockInterior);
        self.policy.dist(h, c, s)
    }
}

impl Learner for ComOmd {
    fn name(&self) -> &'static str {
        match self.space.conds.mode {
            ConditionMode::ActionBased => "com_omd",
            ConditionMode::SubPolicy => "comsp_omd",
        }
    }

    fn strategy(&self) -> &dyn Strategy {
        &self.policy
    }

    fn end_episode(&mut self, fb: &Feedback) -> Result<()> {
        self.update(fb.trajectory)
    }

    fn params(&self) -> Vec<ParamValue> {
        self.param_log.clone()
    }
}
