//! Many configs, optionally in parallel.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{run, Summary};
use crate::error::{config, Result};

/// Thread count override for sweeps and multi-seed runs.
pub const THREADS_ENV: &str = "PAMDP_THREADS";

pub fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

/// Runs `f` on a pool sized from `PAMDP_THREADS`, or rayon's default.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug)]
pub struct SweepEntry {
    pub path: PathBuf,
    pub outcome: Result<(Summary, PathBuf)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub config: String,
    pub run_id: String,
    pub algo: String,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub n_seeds: Option<usize>,
    pub mean_final_regret: Option<f64>,
    pub ci95: Option<f64>,
    pub slope: Option<f64>,
    pub passed: bool,
    pub error: String,
}

impl SweepEntry {
    pub fn row(&self) -> SummaryRow {
        let config = self.path.display().to_string();
        match &self.outcome {
            Ok((s, _)) => SummaryRow {
                config,
                run_id: s.run_id.clone(),
                algo: s.algo.clone(),
                k: Some(s.k),
                n_seeds: Some(s.seeds.len()),
                mean_final_regret: Some(s.mean_final_regret),
                ci95: Some(s.ci95),
                slope: s.slope,
                passed: s.passed,
                error: String::new(),
            },
            Err(e) => SummaryRow {
                config,
                run_id: String::new(),
                algo: String::new(),
                k: None,
                n_seeds: None,
                mean_final_regret: None,
                ci95: None,
                slope: None,
                passed: false,
                error: e.to_string(),
            },
        }
    }
}

fn run_one(path: &Path, out: &Path) -> Result<(Summary, PathBuf)> {
    let cfg = ExperimentConfig::from_path(path)?;
    let rec = run(&cfg)?;
    let csv = rec.write_outputs(out)?;
    Ok((rec.summary, csv))
}

/// Expands `pattern`, sorted by path.
pub fn expand(pattern: &str) -> Result<Vec<PathBuf>> {
    let mut paths = glob::glob(pattern)
        .map_err(|e| crate::Error::Config(format!("bad glob {pattern:?}: {e}")))?
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| crate::Error::Config(format!("glob {pattern:?}: {e}")))?;
    paths.sort();
    if paths.is_empty() {
        return config(format!("glob {pattern:?} matched no files"));
    }
    Ok(paths)
}

/// Runs every config, isolating failures per config, and writes
/// `summary.csv` under `out`.
pub fn sweep(paths: &[PathBuf], out: &Path, threads: Option<usize>) -> Result<Vec<SweepEntry>> {
    std::fs::create_dir_all(out)?;
    let mut ids: Vec<String> = Vec::new();
    for p in paths {
        if let Ok(c) = ExperimentConfig::from_path(p) {
            let id = c.run_id().to_string();
            if ids.contains(&id) {
                return config(format!("run_id {id:?} appears in more than one config"));
            }
            ids.push(id);
        }
    }
    let entries = with_pool(threads, || {
        paths.par_iter().map(|p| SweepEntry { path: p.clone(), outcome: run_one(p, out) }).collect::<Vec<_>>()
    })?;
    let mut w = csv::Writer::from_path(out.join("summary.csv")).map_err(|e| crate::Error::Config(format!("csv: {e}")))?;
    for e in &entries {
        w.serialize(e.row()).map_err(|e| crate::Error::Config(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(entries)
}
