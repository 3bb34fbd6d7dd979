//! `argmin_{x in P} eta <x, l> + KL(x || x_prev)` by exact coordinate ascent
//! on the dual.
//!
//! The primal iterate is kept as `x = y exp(-A^T lambda - G^T nu)` with
//! `y = x_prev exp(-eta l)`. Each equality row has a closed-form dual
//! update; each one-sided interval row is solved along its dual coordinate
//! and clamped at `nu >= 0`. Forced-zero variables never enter.

use std::io::Write;
use std::path::Path;

use super::SolverOptions;
use crate::conditions::Com;
use crate::confidence::polytope::{membership_of, RowKind};
use crate::confidence::ComPolytopeSpec;
use crate::error::{config, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub residual: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct KlOutcome {
    pub com: Com,
    pub iterations: usize,
    pub residual: f64,
    pub objective: f64,
    pub trace: Vec<TraceRow>,
}

impl KlOutcome {
    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "iteration,residual,objective")?;
        for r in &self.trace {
            writeln!(f, "{},{:e},{:.17e}", r.iteration, r.residual, r.objective)?;
        }
        Ok(())
    }
}

struct EqRow {
    pos: Vec<usize>,
    neg: Vec<usize>,
    rhs: f64,
}

struct Side {
    target: usize,
    rest: Vec<usize>,
    /// Multiplier: `pbar + eps` for an upper row, `pbar - eps` for a lower.
    m: f64,
    upper: bool,
}

/// Rows restricted to the free variables.
struct System {
    eqs: Vec<EqRow>,
    sides: Vec<Side>,
}

fn compile(poly: &ComPolytopeSpec) -> System {
    let z = &poly.forced_zero;
    let mut eqs = Vec::with_capacity(poly.eqs.len());
    for r in &poly.eqs {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (&i, &c) in r.idx.iter().zip(&r.coef) {
            if z[i] {
                continue;
            }
            if c > 0.0 {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
        if pos.is_empty() && neg.is_empty() {
            continue;
        }
        debug_assert!(r.kind == RowKind::Mass || (!pos.is_empty() && !neg.is_empty()));
        eqs.push(EqRow { pos, neg, rhs: r.rhs });
    }
    let mut sides = Vec::new();
    for r in &poly.intervals {
        if z[r.target] {
            continue;
        }
        let rest: Vec<usize> = r.group.clone().filter(|&i| i != r.target && !z[i]).collect();
        if let Some(u) = r.upper() {
            sides.push(Side { target: r.target, rest: rest.clone(), m: u, upper: true });
        }
        if let Some(l) = r.lower() {
            sides.push(Side { target: r.target, rest, m: l, upper: false });
        }
    }
    System { eqs, sides }
}

#[inline]
fn sum(x: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| x[i]).sum()
}

#[inline]
fn scale(x: &mut [f64], idx: &[usize], f: f64) {
    for &i in idx {
        x[i] *= f;
    }
}

fn objective(x: &[f64], y0: &[f64], loss: &[f64], eta: f64, free: &[bool]) -> f64 {
    let mut f = 0.0;
    for i in 0..x.len() {
        if !free[i] {
            continue;
        }
        f += eta * loss[i] * x[i];
        if x[i] > 0.0 {
            f += x[i] * (x[i] / y0[i]).ln() - x[i] + y0[i];
        } else {
            f += y0[i];
        }
    }
    f
}

/// One mirror-descent step from `prev` with loss estimate `loss`.
pub fn omd_kl_step(poly: &ComPolytopeSpec, prev: &Com, loss: &[f64], eta: f64, opts: &SolverOptions) -> Result<KlOutcome> {
    opts.validate()?;
    let n = poly.n_vars();
    if prev.v.len() != n || loss.len() != n || prev.space.layout != poly.space.layout {
        return config("iterate or loss does not match the polytope layout");
    }
    if !eta.is_finite() || eta < 0.0 {
        return config(format!("step size must be finite and nonnegative, got {eta}"));
    }
    if loss.iter().any(|l| !l.is_finite()) {
        return config("loss estimate has non-finite entries");
    }
    let free: Vec<bool> = poly.forced_zero.iter().map(|z| !z).collect();
    let y0: Vec<f64> = (0..n).map(|i| if free[i] { prev.v[i].max(opts.floor) } else { 0.0 }).collect();
    let mut x: Vec<f64> = (0..n).map(|i| if free[i] { y0[i] * (-eta * loss[i]).exp() } else { 0.0 }).collect();
    let sys = compile(poly);
    let mut nu = vec![0.0; sys.sides.len()];
    let mut trace = Vec::new();
    let mut last_res = f64::INFINITY;
    let step_tol = 1e-10;

    for it in 1..=opts.max_iters {
        let mut max_step: f64 = 0.0;
        for r in &sys.eqs {
            let xp = sum(&x, &r.pos);
            let delta = if r.neg.is_empty() {
                (xp / r.rhs).ln()
            } else {
                let xn = sum(&x, &r.neg);
                if !(xp > 0.0 && xn > 0.0) {
                    return Err(Error::Solver { message: "flow row lost all mass".into(), residual: (xp - xn).abs(), best: Some(x) });
                }
                0.5 * (xp / xn).ln()
            };
            if !delta.is_finite() {
                return Err(Error::Solver { message: "non-finite dual step".into(), residual: f64::INFINITY, best: Some(x) });
            }
            max_step = max_step.max(delta.abs());
            scale(&mut x, &r.pos, (-delta).exp());
            scale(&mut x, &r.neg, delta.exp());
        }
        for (k, sd) in sys.sides.iter().enumerate() {
            let xt = x[sd.target];
            let rest = sum(&x, &sd.rest);
            let (a, b) = (1.0 - sd.m, sd.m);
            // unconstrained optimum along this dual coordinate
            let raw = if sd.upper {
                if rest <= 0.0 {
                    f64::INFINITY
                } else {
                    (a * xt / (b * rest)).ln()
                }
            } else if xt <= 0.0 {
                f64::INFINITY
            } else {
                (b * rest / (a * xt)).ln()
            };
            let target = (nu[k] + raw).max(0.0);
            let delta = target - nu[k];
            if delta == 0.0 {
                continue;
            }
            if !delta.is_finite() {
                return Err(Error::Solver { message: "interval row cannot be satisfied".into(), residual: f64::INFINITY, best: Some(x) });
            }
            nu[k] = target;
            max_step = max_step.max(delta.abs());
            if sd.upper {
                x[sd.target] *= (-a * delta).exp();
                scale(&mut x, &sd.rest, (b * delta).exp());
            } else {
                x[sd.target] *= (a * delta).exp();
                scale(&mut x, &sd.rest, (-b * delta).exp());
            }
        }
        let check = max_step <= 1e-6 || opts.trace || it % 16 == 0;
        if check {
            last_res = membership_of(poly, &x, f64::INFINITY).worst();
        }
        if opts.trace {
            trace.push(TraceRow { iteration: it, residual: last_res, objective: objective(&x, &y0, loss, eta, &free) });
        }
        if max_step <= step_tol && last_res <= 0.1 * opts.tol_constraint {
            let obj = objective(&x, &y0, loss, eta, &free);
            let mut com = Com::zeros(&prev.space);
            com.v = x;
            return Ok(KlOutcome { com, iterations: it, residual: last_res, objective: obj, trace });
        }
    }
    let res = membership_of(poly, &x, f64::INFINITY).worst();
    Err(Error::Solver { message: format!("no convergence in {} sweeps", opts.max_iters), residual: res, best: Some(x) })
}

/// Objective of the mirror step at `x`, for certification in tests.
pub fn kl_objective(poly: &ComPolytopeSpec, prev: &Com, loss: &[f64], eta: f64, x: &[f64], floor: f64) -> f64 {
    let free: Vec<bool> = poly.forced_zero.iter().map(|z| !z).collect();
    let y0: Vec<f64> = (0..x.len()).map(|i| if free[i] { prev.v[i].max(floor) } else { 0.0 }).collect();
    objective(x, &y0, loss, eta, &free)
}
