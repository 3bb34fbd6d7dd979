//! Exhaustive trajectory enumeration and Monte-Carlo visit frequencies.

use rand::{RngExt, SeedableRng};

use crate::error::{config, Result};
use crate::mdp::{Branch, EpisodeRealization, LossTable, MdpShape, Strategy, Trajectory};
use crate::rng::StreamRng;

/// Largest number of trajectories enumerated.
pub const MAX_PATHS: usize = 1_000_000;

/// Every trajectory with positive probability under `strategy` on `r`,
/// with that probability.
pub fn enumerate_trajectories(shape: &MdpShape, r: &EpisodeRealization, strategy: &dyn Strategy) -> Result<Vec<(f64, Trajectory)>> {
    struct Walk<'a> {
        shape: &'a MdpShape,
        r: &'a EpisodeRealization,
        strategy: &'a dyn Strategy,
        out: Vec<(f64, Trajectory)>,
    }
    impl Walk<'_> {
        fn go(&mut self, h: usize, s: usize, m: usize, p: f64, tr: &mut Trajectory) -> Result<()> {
            let mut br: Vec<Branch> = Vec::new();
            self.strategy.branches(h, s, m, &mut br);
            for b in br {
                if b.prob <= 0.0 {
                    continue;
                }
                tr.states.push(s);
                tr.actions.push(b.action);
                tr.tags.push(b.tag);
                tr.losses.push(self.r.losses.get(h, s, b.action));
                let pb = p * b.prob;
                if h + 1 == self.shape.h {
                    if self.out.len() >= MAX_PATHS {
                        return config(format!("more than {MAX_PATHS} trajectories"));
                    }
                    self.out.push((pb, tr.clone()));
                } else {
                    for (s2, &q) in self.r.kernel.row(h, s, b.action).iter().enumerate() {
                        if q > 0.0 {
                            let m2 = self.strategy.advance(h, s, m, b.tag, s2);
                            self.go(h + 1, s2, m2, pb * q, tr)?;
                        }
                    }
                }
                tr.states.pop();
                tr.actions.pop();
                tr.tags.pop();
                tr.losses.pop();
            }
            Ok(())
        }
    }
    let mut w = Walk { shape, r, strategy, out: Vec::new() };
    let mut tr = Trajectory { states: vec![], actions: vec![], losses: vec![], tags: vec![] };
    w.go(0, shape.s_init, strategy.initial_memory(), 1.0, &mut tr)?;
    Ok(w.out)
}

/// `sum_paths P(path) f(path)`, entrywise.
pub fn expectation<F>(paths: &[(f64, Trajectory)], mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&Trajectory) -> Result<Vec<f64>>,
{
    let mut acc: Vec<f64> = Vec::new();
    for (p, tr) in paths {
        let v = f(tr)?;
        if acc.is_empty() {
            acc = vec![0.0; v.len()];
        }
        if v.len() != acc.len() {
            return config("estimator output length changed between trajectories");
        }
        for (a, x) in acc.iter_mut().zip(&v) {
            *a += p * x;
        }
    }
    Ok(acc)
}

/// Expected value of an estimator built from one episode: enumerates all
/// trajectories of `strategy` on `r` and averages `estimate` over them.
pub fn exact_estimator_expectation<F>(shape: &MdpShape, r: &EpisodeRealization, strategy: &dyn Strategy, estimate: F) -> Result<Vec<f64>>
where
    F: FnMut(&Trajectory) -> Result<Vec<f64>>,
{
    let paths = enumerate_trajectories(shape, r, strategy)?;
    expectation(&paths, estimate)
}

#[derive(Debug, Clone)]
pub struct MonteCarloOccupancy {
    pub freq: LossTable,
    /// Binomial standard error `sqrt(f (1 - f) / n)`.
    pub se: LossTable,
    pub n: usize,
}

/// Visit frequencies of `(h, s, a)` over `n` independent episodes.
pub fn monte_carlo_occupancy(shape: &MdpShape, r: &EpisodeRealization, strategy: &dyn Strategy, n: usize, seed: u64) -> Result<MonteCarloOccupancy> {
    if n == 0 {
        return config("monte carlo needs at least one episode");
    }
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut counts = LossTable::for_shape(shape);
    let mut br: Vec<Branch> = Vec::new();
    let pick = |rng: &mut StreamRng, w: &mut dyn Iterator<Item = f64>| -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, p) in w.enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    };
    for _ in 0..n {
        let mut s = shape.s_init;
        let mut m = strategy.initial_memory();
        for h in 0..shape.h {
            strategy.branches(h, s, m, &mut br);
            let b = br[pick(&mut rng, &mut br.iter().map(|b| b.prob))];
            let i = counts.idx(h, s, b.action);
            counts.l[i] += 1.0;
            if h + 1 < shape.h {
                let s2 = pick(&mut rng, &mut r.kernel.row(h, s, b.action).iter().copied());
                m = strategy.advance(h, s, m, b.tag, s2);
                s = s2;
            }
        }
    }
    let nf = n as f64;
    let mut freq = counts.clone();
    let mut se = counts;
    for (f, e) in freq.l.iter_mut().zip(se.l.iter_mut()) {
        *f /= nf;
        *e = (*f * (1.0 - *f) / nf).sqrt();
    }
    Ok(MonteCarloOccupancy { freq, se, n })
}
