//! Experiment JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::instances::{AdversaryKind, BlockInstance, PartialAdversarial, TwoStateCopies};
use crate::learners::LearnerConfig;
use crate::mdp::json::{EpisodeJson, InstanceJson};
use crate::mdp::{EpisodeSupplier, MdpShape, ObliviousSequence};
use crate::rng::RngStreams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceConfig {
    PartialAdversarial {
        #[serde(rename = "S")]
        s: usize,
        #[serde(rename = "A")]
        a: usize,
        #[serde(rename = "H")]
        h: usize,
        /// 1-based.
        #[serde(default)]
        adv_steps: Vec<usize>,
        #[serde(default)]
        s_init: usize,
        adversary: AdversaryKind,
    },
    FfHard {
        #[serde(rename = "S")]
        s: usize,
        #[serde(rename = "A")]
        a: usize,
        #[serde(rename = "H")]
        h: usize,
        #[serde(default)]
        eps: Option<f64>,
    },
    BfHard {
        #[serde(rename = "S")]
        s: usize,
        #[serde(rename = "A")]
        a: usize,
        #[serde(rename = "H")]
        h: usize,
        #[serde(default)]
        eps: Option<f64>,
    },
    BbTwoState {
        #[serde(rename = "A")]
        a: usize,
        #[serde(rename = "H")]
        h: usize,
        #[serde(default)]
        eps: Option<f64>,
    },
    BbFull {
        #[serde(rename = "S")]
        s: usize,
        #[serde(rename = "A")]
        a: usize,
        #[serde(rename = "H")]
        h: usize,
        #[serde(default)]
        eps: Option<f64>,
    },
    /// A fixed instance with every episode spelled out.
    Explicit { instance: InstanceJson, episodes: Vec<EpisodeJson> },
}

impl InstanceConfig {
    /// Whether the construction only allows trajectory loss feedback.
    fn bandit_only(&self) -> bool {
        matches!(self, InstanceConfig::BfHard { .. })
    }

    pub fn build(&self, k: usize, streams: &RngStreams) -> Result<Box<dyn EpisodeSupplier>> {
        let seed = streams.seed_for("environment", 0);
        Ok(match self {
            InstanceConfig::PartialAdversarial { s, a, h, adv_steps, s_init, adversary } => {
                let shape = MdpShape::from_one_based(*s, *a, *h, adv_steps, *s_init)?;
                Box::new(PartialAdversarial::new(&shape, *adversary, seed)?)
            }
            InstanceConfig::FfHard { s, a, h, eps } => Box::new(BlockInstance::ff(k, *s, *a, *h, *eps, &mut streams.stream("environment"))?),
            InstanceConfig::BfHard { s, a, h, eps } => Box::new(BlockInstance::bf(k, *s, *a, *h, *eps, &mut streams.stream("environment"))?),
            InstanceConfig::BbTwoState { a, h, eps } => Box::new(TwoStateCopies::two_state(k, *a, *h, *eps, seed)?),
            InstanceConfig::BbFull { s, a, h, eps } => Box::new(TwoStateCopies::full(k, *s, *a, *h, *eps, seed)?),
            InstanceConfig::Explicit { instance, episodes } => {
                let (shape, kernel) = instance.into_parts()?;
                let eps = episodes
                    .iter()
                    .enumerate()
                    .map(|(i, e)| e.into_realization(&shape).map_err(|err| crate::Error::Config(format!("instance.episodes[{i}]: {err}"))))
                    .collect::<Result<Vec<_>>>()?;
                Box::new(ObliviousSequence::new(shape, kernel, eps)?)
            }
        })
    }
}

/// Checks applied to a finished run; the CLI exits nonzero if any fails.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    #[serde(default)]
    pub max_slope: Option<f64>,
    #[serde(default)]
    pub slope_kmin: Option<usize>,
    #[serde(default)]
    pub max_mean_final_regret: Option<f64>,
    #[serde(default)]
    pub max_mean_regret_per_episode: Option<f64>,
    /// Bound on `|R_k|` over every seed and episode.
    #[serde(default)]
    pub max_abs_regret: Option<f64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub run_id: Option<String>,
    pub instance: InstanceConfig,
    pub learner: LearnerConfig,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub loss_full_info: bool,
    #[serde(default)]
    pub transition_full_info: bool,
    /// Output directory; the CLI's `--out` takes precedence.
    #[serde(default)]
    pub output: Option<String>,
    /// Per seed, how many leading realizations to write out for audit.
    #[serde(default)]
    pub dump_episodes: Option<usize>,
    #[serde(default)]
    pub assertions: Assertions,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; `run_id` defaults to the file stem.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| crate::Error::Config(format!("{}: {e}", path.display())))?;
        if cfg.run_id.is_none() {
            cfg.run_id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn run_id(&self) -> &str {
        self.run_id.as_deref().unwrap_or("run")
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return config("seeds must list at least one seed");
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return config("seeds must be distinct");
        }
        let needs = self.learner.feedback_needs();
        let algo = self.learner.algo.as_str();
        if needs.losses && !self.loss_full_info {
            return config(format!("loss_full_info must be true for {algo}"));
        }
        if needs.transitions && !self.transition_full_info {
            return config(format!("transition_full_info must be true for {algo}"));
        }
        if self.loss_full_info && self.instance.bandit_only() {
            return config("loss_full_info is not available on bf_hard instances");
        }
        if !(0.0..1.0).contains(&self.learner.delta) || self.learner.delta == 0.0 {
            return config(format!("learner.delta must lie in (0, 1), got {}", self.learner.delta));
        }
        if let Some(r) = &self.run_id {
            if r.is_empty() || r.contains(['/', '\\', ',']) {
                return config(format!("run_id {r:?} must be non-empty without path separators or commas"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "instance": {"generator": "partial_adversarial", "S": 2, "A": 2, "H": 3, "adv_steps": [1], "adversary": "oblivious_random"},
        "learner": {"algo": "com_omd"},
        "K": 10
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.seeds, vec![0]);
        assert!(!c.loss_full_info);
        assert_eq!(c.run_id(), "run");
    }

    #[test]
    fn hedge_needs_full_information() {
        let t = BASE.replace("com_omd", "hedge_ff");
        let e = ExperimentConfig::parse(&t).unwrap_err().to_string();
        assert!(e.contains("loss_full_info"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let t = BASE.replace("\"K\": 10", "\"K\": 10, \"bogus\": 1");
        assert!(ExperimentConfig::parse(&t).is_err());
        let t = BASE.replace("\"S\": 2,", "\"S\": 2, \"bogus\": 1,");
        assert!(ExperimentConfig::parse(&t).is_err());
    }
}
