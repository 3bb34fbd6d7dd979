//! One experiment: every seed of one config.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::slope::{slope, MIN_POINTS};
use crate::error::{config, Result};
use crate::learners::{build_learner, Feedback, Learner, ParamValue};
use crate::mdp::json::EpisodeJson;
use crate::mdp::{simulate_episode, EpisodeRealization, EpisodeSupplier, History, MdpShape};
use crate::oracle::BenchmarkTracker;
use crate::rng::{RngStreams, StreamRng};

/// One CSV line. `episode_loss` is the learner's exact expected value on
/// the episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: String,
    pub seed: u64,
    pub algo: String,
    pub k: usize,
    pub episode_loss: f64,
    pub cum_loss: f64,
    pub benchmark_cum: f64,
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRow {
    /// 1-based.
    pub k: usize,
    pub learner_value: f64,
    pub sampled_loss: f64,
    pub cum_loss: f64,
    pub benchmark_cum: f64,
    pub regret: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub rows: Vec<EpisodeRow>,
    pub params: Vec<ParamValue>,
    pub adaptivity: &'static str,
    #[serde(skip)]
    pub dumped: Vec<EpisodeRealization>,
}

impl SeedRecord {
    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.regret)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub name: String,
    pub value: Option<f64>,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub run_id: String,
    pub algo: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub seeds: Vec<u64>,
    pub final_regret: Vec<f64>,
    pub mean_final_regret: f64,
    /// Half-width of the normal 95% interval over seeds.
    pub ci95: f64,
    pub mean_regret_per_episode: f64,
    pub slope_kmin: usize,
    pub slope: Option<f64>,
    pub assertions: Vec<AssertionResult>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedRecord>,
    pub summary: Summary,
}

/// Mean and 95% half-width `1.96 sd / sqrt(n)`; zero width for one value.
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (m, 1.96 * var.sqrt() / (n as f64).sqrt())
}

/// Regret at each `k` averaged over seeds.
pub fn mean_curve(seeds: &[SeedRecord]) -> Vec<(usize, f64)> {
    let Some(first) = seeds.first() else { return Vec::new() };
    (0..first.rows.len())
        .map(|i| (first.rows[i].k, seeds.iter().map(|s| s.rows[i].regret).sum::<f64>() / seeds.len() as f64))
        .collect()
}

/// One seed's episode loop, advanced an episode at a time.
pub struct SeedRunner {
    cfg: ExperimentConfig,
    seed: u64,
    shape: MdpShape,
    supplier: Box<dyn EpisodeSupplier>,
    learner: Box<dyn Learner>,
    bench: BenchmarkTracker,
    learner_rng: StreamRng,
    play_rng: StreamRng,
    history: History,
    rows: Vec<EpisodeRow>,
    dumped: Vec<EpisodeRealization>,
    cum: f64,
}

impl SeedRunner {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let streams = RngStreams::new(seed);
        let supplier = cfg.instance.build(cfg.k, &streams)?;
        if let Some(m) = supplier.max_episodes() {
            if cfg.k > m {
                return config(format!("K = {} exceeds the {m} episodes the instance provides", cfg.k));
            }
        }
        let shape = supplier.shape().clone();
        let learner = build_learner(&cfg.learner, &shape, cfg.k, supplier.stationary_kernel())?;
        let bench = BenchmarkTracker::new(&shape)?;
        Ok(Self {
            cfg: cfg.clone(),
            seed,
            shape,
            supplier,
            learner,
            bench,
            learner_rng: streams.stream("learner"),
            play_rng: streams.stream("play"),
            history: History::default(),
            rows: Vec::with_capacity(cfg.k),
            dumped: Vec::new(),
            cum: 0.0,
        })
    }

    pub fn shape(&self) -> &MdpShape {
        &self.shape
    }

    /// Episodes played so far.
    pub fn done(&self) -> usize {
        self.rows.len()
    }

    pub fn finished(&self) -> bool {
        self.rows.len() >= self.cfg.k
    }

    pub fn rows(&self) -> &[EpisodeRow] {
        &self.rows
    }

    /// Plays the next episode; `None` once all `K` are done.
    pub fn step(&mut self) -> Result<Option<&EpisodeRow>> {
        if self.finished() {
            return Ok(None);
        }
        let k = self.rows.len();
        let t0 = Instant::now();
        let r = self.supplier.next_episode(k, &self.history)?;
        self.learner.begin_episode(&mut self.learner_rng)?;
        let v = self.learner.expected_value(&self.shape, &r)?;
        let tr = simulate_episode(&self.shape, &r, self.learner.strategy(), &mut self.play_rng)?;
        let fb = Feedback {
            trajectory: &tr,
            losses: self.cfg.loss_full_info.then_some(&r.losses),
            kernel: self.cfg.transition_full_info.then_some(&r.kernel),
        };
        self.learner.end_episode(&fb).map_err(|e| crate::Error::Contract(format!("episode {}: {e}", k + 1)))?;
        self.bench.push(&r)?;
        self.cum += v;
        let b = self.bench.best().1;
        self.rows.push(EpisodeRow {
            k: k + 1,
            learner_value: v,
            sampled_loss: tr.total_loss(),
            cum_loss: self.cum,
            benchmark_cum: b,
            regret: self.cum - b,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        });
        if k < self.cfg.dump_episodes.unwrap_or(0) {
            self.dumped.push(r);
        }
        self.history.trajectories.push(tr);
        Ok(self.rows.last())
    }

    pub fn finish(self) -> SeedRecord {
        SeedRecord {
            seed: self.seed,
            rows: self.rows,
            params: self.learner.params(),
            adaptivity: self.supplier.adaptivity().as_str(),
            dumped: self.dumped,
        }
    }
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRecord> {
    let mut r = SeedRunner::new(cfg, seed)?;
    while r.step()?.is_some() {}
    Ok(r.finish())
}

fn summarize(cfg: &ExperimentConfig, seeds: &[SeedRecord]) -> Summary {
    let finals: Vec<f64> = seeds.iter().map(SeedRecord::final_regret).collect();
    let (mean, ci95) = mean_ci(&finals);
    let a = &cfg.assertions;
    let kmin = a.slope_kmin.unwrap_or(1);
    let curve = mean_curve(seeds);
    let fitted = if curve.iter().filter(|p| p.0 >= kmin).count() >= MIN_POINTS { slope(&curve, kmin).ok() } else { None };
    let per_ep = if cfg.k > 0 { mean / cfg.k as f64 } else { 0.0 };
    let mut checks = Vec::new();
    let mut check = |name: &str, value: Option<f64>, bound: Option<f64>| {
        if let Some(bound) = bound {
            let passed = value.is_some_and(|v| v <= bound);
            checks.push(AssertionResult { name: name.into(), value, bound, passed });
        }
    };
    check("max_slope", fitted, a.max_slope);
    check("max_mean_final_regret", Some(mean), a.max_mean_final_regret);
    check("max_mean_regret_per_episode", Some(per_ep), a.max_mean_regret_per_episode);
    let worst = seeds.iter().flat_map(|s| s.rows.iter().map(|r| r.regret.abs())).fold(0.0, f64::max);
    check("max_abs_regret", Some(worst), a.max_abs_regret);
    let passed = checks.iter().all(|c| c.passed);
    Summary {
        run_id: cfg.run_id().to_string(),
        algo: cfg.learner.algo.as_str().to_string(),
        k: cfg.k,
        seeds: cfg.seeds.clone(),
        final_regret: finals,
        mean_final_regret: mean,
        ci95,
        mean_regret_per_episode: per_ep,
        slope_kmin: kmin,
        slope: fitted,
        assertions: checks,
        passed,
    }
}

/// Runs every seed; seeds may run concurrently, results keep seed order.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let seeds = cfg
        .seeds
        .par_iter()
        .map(|&s| run_seed(cfg, s).map_err(|e| crate::Error::Config(format!("seed {s}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &seeds);
    Ok(ExperimentRecord { config: cfg.clone(), seeds, summary })
}

impl ExperimentRecord {
    pub fn csv_rows(&self) -> impl Iterator<Item = CsvRow> + '_ {
        let id = self.config.run_id();
        let algo = self.config.learner.algo.as_str();
        self.seeds.iter().flat_map(move |s| {
            s.rows.iter().map(move |r| CsvRow {
                run_id: id.to_string(),
                seed: s.seed,
                algo: algo.to_string(),
                k: r.k,
                episode_loss: r.learner_value,
                cum_loss: r.cum_loss,
                benchmark_cum: r.benchmark_cum,
                regret: r.regret,
            })
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(["run_id", "seed", "algo", "k", "episode_loss", "cum_loss", "benchmark_cum", "regret"]).map_err(csv_err)?;
        for row in self.csv_rows() {
            out.serialize(row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `<run_id>.csv`, `<run_id>.summary.json` and, when requested,
    /// `<run_id>.episodes.jsonl` under `dir`. Returns the CSV path.
    pub fn write_outputs(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let id = self.config.run_id();
        let csv_path = dir.join(format!("{id}.csv"));
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv_path)?))?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{id}.summary.json")))?);
        serde_json::to_writer_pretty(&mut f, &self.summary)?;
        writeln!(f)?;
        if self.config.dump_episodes.is_some_and(|n| n > 0) {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{id}.episodes.jsonl")))?);
            for s in &self.seeds {
                for (k, r) in s.dumped.iter().enumerate() {
                    let line = serde_json::json!({ "seed": s.seed, "k": k + 1, "episode": EpisodeJson::from_realization(r) });
                    writeln!(f, "{line}")?;
                }
            }
        }
        Ok(csv_path)
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Config(format!("csv: {e}"))
}

/// Reads a run CSV back.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Seed-averaged `(k, R_k)` from CSV rows.
pub fn curve_from_rows(rows: &[CsvRow]) -> Vec<(usize, f64)> {
    let mut acc: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for r in rows {
        let e = acc.entry(r.k).or_default();
        e.0 += r.regret;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}
