//! Occupancy-measure mirror descent for fully stationary transitions,
//! written directly over `q_h(s, a, s')` and solved with the barrier oracle.
//! Used to check that conditioned mirror descent reduces to it when no step
//! is adversarial.

use super::barrier::barrier_kl;
use super::lp::LinearSystem;
use crate::error::{config, Result};
use crate::mdp::{MarkovPolicy, MdpShape, Trajectory};

pub struct ReferenceOmOmd {
    s: usize,
    a: usize,
    h: usize,
    s_init: usize,
    eta: f64,
    gamma: f64,
    log_term: f64,
    n_sa: Vec<f64>,
    n_sas: Vec<f64>,
    q: Vec<f64>,
    last_estimate: Vec<f64>,
}

impl ReferenceOmOmd {
    pub fn new(shape: &MdpShape, eta: f64, gamma: f64, delta: f64, k_total: usize) -> Result<Self> {
        if shape.lambda() != 0 {
            return config("reference learner needs stationary transitions");
        }
        let (s, a, h) = (shape.s, shape.a, shape.h);
        let log_term = ((k_total.max(1) * s * a) as f64 / delta).ln();
        let mut r = Self {
            s,
            a,
            h,
            s_init: shape.s_init,
            eta,
            gamma,
            log_term,
            n_sa: vec![0.0; h.saturating_sub(1) * s * a],
            n_sas: vec![0.0; h.saturating_sub(1) * s * a * s],
            q: Vec::new(),
            last_estimate: Vec::new(),
        };
        r.q = r.uniform_q();
        Ok(r)
    }

    fn n_vars(&self) -> usize {
        (self.h - 1) * self.s * self.a * self.s + self.s * self.a
    }

    /// `q_h(s, a, s')` for `h < H - 1`, `q_{H-1}(s, a)` after.
    fn ix(&self, h: usize, s: usize, a: usize, s2: usize) -> usize {
        if h + 1 < self.h {
            ((h * self.s + s) * self.a + a) * self.s + s2
        } else {
            (self.h - 1) * self.s * self.a * self.s + s * self.a + a
        }
    }

    fn width(&self, h: usize) -> usize {
        if h + 1 < self.h {
            self.s
        } else {
            1
        }
    }

    fn uniform_q(&self) -> Vec<f64> {
        let mut q = vec![0.0; self.n_vars()];
        let mut d = vec![0.0; self.s];
        d[self.s_init] = 1.0;
        let pa = 1.0 / self.a as f64;
        for h in 0..self.h {
            let w = self.width(h);
            let mut next = vec![0.0; self.s];
            for s in 0..self.s {
                for a in 0..self.a {
                    for y in 0..w {
                        let v = d[s] * pa / w as f64;
                        q[self.ix(h, s, a, y)] = v;
                        next[y] += v;
                    }
                }
            }
            d = next;
        }
        q
    }

    fn pbar_eps(&self, h: usize, s: usize, a: usize, y: usize) -> (f64, f64) {
        let i = (h * self.s + s) * self.a + a;
        let n = self.n_sa[i];
        let p = if n > 0.0 { self.n_sas[i * self.s + y] / n } else { 1.0 / self.s as f64 };
        let d = (n - 1.0).max(1.0);
        (p, 2.0 * (p * self.log_term / d).sqrt() + 14.0 * self.log_term / d)
    }

    fn bounds(&self, h: usize, s: usize, a: usize, y: usize) -> (f64, f64) {
        let (p, e) = self.pbar_eps(h, s, a, y);
        ((p - e).max(0.0), (p + e).min(1.0))
    }

    /// Iterate on the `q_h(s, a, s')` layout.
    pub fn occupancy(&self) -> &[f64] {
        &self.q
    }

    pub fn last_estimate(&self) -> &[f64] {
        &self.last_estimate
    }

    pub fn policy(&self) -> MarkovPolicy {
        let mut pol = MarkovPolicy::uniform(self.s, self.a, self.h);
        for h in 0..self.h {
            for s in 0..self.s {
                let m: Vec<f64> = (0..self.a).map(|a| (0..self.width(h)).map(|y| self.q[self.ix(h, s, a, y)]).sum()).collect();
                let tot: f64 = m.iter().sum();
                if tot > 1e-12 {
                    for a in 0..self.a {
                        pol.pi[(h * self.s + s) * self.a + a] = m[a] / tot;
                    }
                }
            }
        }
        pol
    }

    /// Largest probability of reaching `(h, s)` and playing `a` under the
    /// current policy and any kernel inside the confidence box.
    pub fn upper_occupancy(&self, h: usize, s: usize, a: usize) -> f64 {
        let pol = self.policy();
        let mut v = vec![0.0; self.s];
        v[s] = pol.prob(h, s, a);
        for g in (0..h).rev() {
            let mut nv = vec![0.0; self.s];
            for (x, out) in nv.iter_mut().enumerate() {
                for b in 0..self.a {
                    let w = pol.prob(g, x, b);
                    if w == 0.0 {
                        continue;
                    }
                    // fill the box greedily towards the largest values
                    let mut p: Vec<f64> = (0..self.s).map(|y| self.bounds(g, x, b, y).0).collect();
                    let mut left = 1.0 - p.iter().sum::<f64>();
                    let mut order: Vec<usize> = (0..self.s).collect();
                    order.sort_by(|&i, &j| v[j].partial_cmp(&v[i]).unwrap());
                    for y in order {
                        let add = (self.bounds(g, x, b, y).1 - p[y]).min(left).max(0.0);
                        p[y] += add;
                        left -= add;
                    }
                    *out += w * p.iter().zip(&v).map(|(p, v)| p * v).sum::<f64>();
                }
            }
            v = nv;
        }
        v[self.s_init]
    }

    fn system(&self) -> LinearSystem {
        let n = self.n_vars();
        let mut sys = LinearSystem { n, ..Default::default() };
        let first: Vec<(usize, f64)> = (0..self.s).flat_map(|s| (0..self.a).flat_map(move |a| (0..self.width(0)).map(move |y| (s, a, y)))).map(|(s, a, y)| (self.ix(0, s, a, y), 1.0)).collect();
        sys.eqs.push((first, 1.0));
        for s in (0..self.s).filter(|&s| s != self.s_init) {
            for a in 0..self.a {
                for y in 0..self.width(0) {
                    sys.zeros.push(self.ix(0, s, a, y));
                }
            }
        }
        for h in 0..self.h - 1 {
            for y in 0..self.s {
                let mut row = Vec::new();
                for a in 0..self.a {
                    for z in 0..self.width(h + 1) {
                        row.push((self.ix(h + 1, y, a, z), 1.0));
                    }
                }
                for s in 0..self.s {
                    for a in 0..self.a {
                        row.push((self.ix(h, s, a, y), -1.0));
                    }
                }
                sys.eqs.push((row, 0.0));
            }
            for s in 0..self.s {
                for a in 0..self.a {
                    for y in 0..self.s {
                        let (p, e) = self.pbar_eps(h, s, a, y);
                        let row = |m: f64, sign: f64| -> Vec<(usize, f64)> { (0..self.s).map(|z| (self.ix(h, s, a, z), sign * (if z == y { 1.0 - m } else { -m }))).collect() };
                        if p + e < 1.0 {
                            sys.les.push(row(p + e, 1.0));
                        }
                        if p - e > 0.0 {
                            sys.les.push(row(p - e, -1.0));
                        }
                    }
                }
            }
        }
        sys
    }

    pub fn update(&mut self, tr: &Trajectory) -> Result<()> {
        if tr.len() != self.h {
            return config("trajectory length does not match the horizon");
        }
        let mut est = vec![0.0; self.n_vars()];
        for h in 0..self.h {
            let (s, a) = (tr.states[h], tr.actions[h]);
            let u = self.upper_occupancy(h, s, a);
            for y in 0..self.width(h) {
                est[self.ix(h, s, a, y)] = tr.losses[h] / (u + self.gamma);
            }
        }
        for h in 0..self.h - 1 {
            let i = (h * self.s + tr.states[h]) * self.a + tr.actions[h];
            self.n_sa[i] += 1.0;
            self.n_sas[i * self.s + tr.states[h + 1]] += 1.0;
        }
        let sys = self.system();
        let y: Vec<f64> = self.q.iter().map(|v| v.max(1e-12)).collect();
        self.q = barrier_kl(&sys, &y, &est, self.eta, 1e-12)?.x;
        self.last_estimate = est;
        Ok(())
    }
}
