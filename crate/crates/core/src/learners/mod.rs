//! Online learners behind a single episode-loop contract.

pub mod com_omd;
pub mod comsp;
pub mod exp4;
pub mod fixed;
pub mod hedge;
pub mod meta;
pub mod params;
pub mod policies;

pub use com_omd::{ComOmd, ComOmdParams, UpperMode};
pub use exp4::{BbExp4, BfExp4};
pub use fixed::FixedPolicy;
pub use hedge::Hedge;
pub use meta::MetaExp3;
pub use params::ParamValue;

use serde::{Deserialize, Serialize};

use crate::conditions::ConditionMode;
use crate::error::{config, contract, Result};
use crate::mdp::{EpisodeRealization, LossTable, MdpShape, Strategy, TransitionKernel, Trajectory};
use crate::rng::StreamRng;
use crate::solvers::SolverOptions;

/// What the learner sees after an episode. Bandit losses arrive through the
/// trajectory; the full tables only when the feedback model grants them.
#[derive(Debug, Clone, Copy)]
pub struct Feedback<'a> {
    pub trajectory: &'a Trajectory,
    pub losses: Option<&'a LossTable>,
    pub kernel: Option<&'a TransitionKernel>,
}

impl<'a> Feedback<'a> {
    pub fn bandit(trajectory: &'a Trajectory) -> Self {
        Self { trajectory, losses: None, kernel: None }
    }

    pub fn require_losses(&self) -> Result<&'a LossTable> {
        self.losses.map_or_else(|| contract("learner needs full-information losses"), Ok)
    }

    pub fn require_kernel(&self) -> Result<&'a TransitionKernel> {
        self.kernel.map_or_else(|| contract("learner needs full-information transitions"), Ok)
    }
}

/// Feedback fields a learner reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeedbackNeeds {
    pub losses: bool,
    pub transitions: bool,
}

pub trait Learner: Send {
    fn name(&self) -> &'static str;

    fn needs(&self) -> FeedbackNeeds {
        FeedbackNeeds::default()
    }

    /// Draws whatever randomness the episode's strategy needs.
    fn begin_episode(&mut self, _rng: &mut StreamRng) -> Result<()> {
        Ok(())
    }

    fn strategy(&self) -> &dyn Strategy;

    /// Expected episode loss of the learner's play on `r`, averaging over
    /// its own draws in `begin_episode`.
    fn expected_value(&self, shape: &MdpShape, r: &EpisodeRealization) -> Result<f64> {
        crate::mdp::value_of_strategy(shape, r, self.strategy())
    }

    fn end_episode(&mut self, fb: &Feedback) -> Result<()>;

    /// Step sizes and similar, raw and after clamping.
    fn params(&self) -> Vec<ParamValue> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    ComOmd,
    ComspOmd,
    MetaUnknown,
    HedgeFf,
    Exp4Bf,
    Exp4Bb,
    FixedPolicy,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::ComOmd => "com_omd",
            Algo::ComspOmd => "comsp_omd",
            Algo::MetaUnknown => "meta_unknown",
            Algo::HedgeFf => "hedge_ff",
            Algo::Exp4Bf => "exp4_bf",
            Algo::Exp4Bb => "exp4_bb",
            Algo::FixedPolicy => "fixed_policy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBoundKind {
    #[default]
    Policy,
    Polytope,
    Exact,
}

fn default_true() -> bool {
    true
}

fn default_delta() -> f64 {
    0.1
}

/// Learner block of the experiment JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub algo: Algo,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default)]
    pub outer_eta: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_true")]
    pub use_paper_defaults: bool,
    #[serde(default)]
    pub upper_bound: UpperBoundKind,
    /// Deterministic actions `actions[h][s]` for `fixed_policy`.
    #[serde(default)]
    pub actions: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub solver_max_iters: Option<usize>,
}

impl LearnerConfig {
    pub fn new(algo: Algo) -> Self {
        Self {
            algo,
            eta: None,
            gamma: None,
            xi: None,
            outer_eta: None,
            delta: default_delta(),
            use_paper_defaults: true,
            upper_bound: UpperBoundKind::Policy,
            actions: None,
            solver_max_iters: None,
        }
    }

    /// Explicit values are used as given; formula defaults are clamped.
    fn pick(&self, name: &'static str, given: Option<f64>, default: f64) -> Result<ParamValue> {
        match given {
            Some(v) if v.is_finite() && v > 0.0 => Ok(ParamValue { name, raw: v, used: v }),
            Some(v) => config(format!("learner.{name} must be positive and finite, got {v}")),
            None if self.use_paper_defaults => Ok(ParamValue::clamped(name, default)),
            None => config(format!("learner.{name} is required when use_paper_defaults is false")),
        }
    }

    pub fn feedback_needs(&self) -> FeedbackNeeds {
        match self.algo {
            Algo::HedgeFf => FeedbackNeeds { losses: true, transitions: true },
            Algo::Exp4Bf => FeedbackNeeds { losses: false, transitions: true },
            _ => FeedbackNeeds::default(),
        }
    }

    fn solver(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(m) = self.solver_max_iters {
            o.max_iters = m;
        }
        o
    }
}

/// Instantiates the configured learner for a run of `k_total` episodes.
/// `stationary` is only read by the exact upper-bound oracle mode.
pub fn build_learner(cfg: &LearnerConfig, shape: &MdpShape, k_total: usize, stationary: &TransitionKernel) -> Result<Box<dyn Learner>> {
    let upper = || match cfg.upper_bound {
        UpperBoundKind::Policy => UpperMode::Policy,
        UpperBoundKind::Polytope => UpperMode::Polytope,
        UpperBoundKind::Exact => UpperMode::Exact(stationary.clone()),
    };
    match cfg.algo {
        Algo::ComOmd | Algo::ComspOmd => {
            let mode = if cfg.algo == Algo::ComOmd { ConditionMode::ActionBased } else { ConditionMode::SubPolicy };
            let lam = if mode == ConditionMode::SubPolicy { shape.lambda().max(1) } else { shape.lambda() };
            let d = params::com_omd_default(k_total, shape.s, shape.a, lam);
            let eta = cfg.pick("eta", cfg.eta, d)?;
            let gamma = cfg.pick("gamma", cfg.gamma, d)?;
            let p = ComOmdParams { eta: eta.used, gamma: gamma.used, delta: cfg.delta, k_total, upper: upper(), solver: cfg.solver() };
            let mut l = ComOmd::new(shape, mode, p)?;
            l.set_param_log(vec![eta, gamma]);
            Ok(Box::new(l))
        }
        Algo::MetaUnknown => {
            let (eta_d, xi_d, gamma_d) = params::meta_defaults(k_total, shape.h, shape.s, shape.a, shape.lambda());
            let eta = cfg.pick("eta", cfg.eta, eta_d)?;
            let xi = cfg.pick("xi", cfg.xi, xi_d)?;
            let gamma = cfg.pick("gamma", cfg.gamma, gamma_d)?;
            let outer = cfg.pick("outer_eta", cfg.outer_eta, eta.used)?;
            let inner = ComOmdParams { eta: eta.used, gamma: gamma.used, delta: cfg.delta, k_total, upper: upper(), solver: cfg.solver() };
            let mut m = MetaExp3::new(shape, shape.lambda(), inner, outer.used, xi.used)?;
            m.set_param_log(vec![eta, xi, gamma, outer]);
            Ok(Box::new(m))
        }
        Algo::HedgeFf => {
            let n = policies::PolicySet::count(shape)?;
            let eta = cfg.pick("eta", cfg.eta, params::hedge_eta(n, k_total, shape.h))?;
            Ok(Box::new(Hedge::new(shape, eta)?))
        }
        Algo::Exp4Bf => {
            let eta = cfg.pick("eta", cfg.eta, params::bf_eta(shape.a, shape.h, k_total))?;
            Ok(Box::new(BfExp4::new(shape, eta)?))
        }
        Algo::Exp4Bb => {
            let eta = cfg.pick("eta", cfg.eta, params::bb_eta(shape.s, shape.a, shape.h, k_total))?;
            Ok(Box::new(BbExp4::new(shape, eta)?))
        }
        Algo::FixedPolicy => {
            let Some(acts) = &cfg.actions else {
                return config("learner.actions is required for fixed_policy");
            };
            Ok(Box::new(FixedPolicy::from_actions(shape, acts)?))
        }
    }
}
