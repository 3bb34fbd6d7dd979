use serde::{Deserialize, Serialize};

use super::{EpisodeRealization, MdpShape};
use crate::error::{config, Result};
use crate::oracle::benchmark::BenchmarkTracker;

/// Cumulative learner loss, best fixed Markov policy loss and their
/// difference after each episode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub learner_cum: Vec<f64>,
    pub benchmark_cum: Vec<f64>,
    pub regret: Vec<f64>,
}

impl RegretCurve {
    pub fn len(&self) -> usize {
        self.regret.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regret.is_empty()
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.regret.last().copied()
    }

    /// Builds the curve from per-episode learner values and the running
    /// benchmark minimum.
    pub fn from_parts(learner_values: &[f64], benchmark_cum: Vec<f64>) -> Result<Self> {
        if learner_values.len() != benchmark_cum.len() {
            return config(format!(
                "{} learner values but {} benchmark entries",
                learner_values.len(),
                benchmark_cum.len()
            ));
        }
        let mut learner_cum = Vec::with_capacity(learner_values.len());
        let mut acc = 0.0;
        for v in learner_values {
            acc += v;
            learner_cum.push(acc);
        }
        let regret = learner_cum.iter().zip(&benchmark_cum).map(|(l, b)| l - b).collect();
        Ok(Self { learner_cum, benchmark_cum, regret })
    }
}

/// Regret against the best deterministic Markov policy on every prefix of
/// the realized episode sequence.
pub fn regret_report(shape: &MdpShape, realizations: &[EpisodeRealization], learner_values: &[f64]) -> Result<RegretCurve> {
    if realizations.len() != learner_values.len() {
        return config(format!(
            "{} realizations but {} learner values",
            realizations.len(),
            learner_values.len()
        ));
    }
    let mut tracker = BenchmarkTracker::new(shape)?;
    let mut bench = Vec::with_capacity(realizations.len());
    for r in realizations {
        tracker.push(r)?;
        bench.push(tracker.best().1);
    }
    RegretCurve::from_parts(learner_values, bench)
}
