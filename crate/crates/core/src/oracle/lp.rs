//! Ground-truth linear programs through an external simplex implementation.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::confidence::ComPolytopeSpec;
use crate::error::{config, Error, Result};

/// Largest variable count accepted.
pub const MAX_LP_VARS: usize = 200;

pub type Terms = Vec<(usize, f64)>;

/// `{x >= 0 : eq rows = rhs, le rows <= 0, x_i = 0 for i in zeros}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearSystem {
    pub n: usize,
    pub eqs: Vec<(Terms, f64)>,
    pub les: Vec<Terms>,
    pub zeros: Vec<usize>,
}

impl LinearSystem {
    /// Reads the polytope's rows directly; the forced-zero closure is not used.
    pub fn from_polytope(poly: &ComPolytopeSpec) -> Self {
        let eqs = poly.eqs.iter().map(|r| (r.idx.iter().copied().zip(r.coef.iter().copied()).collect(), r.rhs)).collect();
        let mut les = Vec::new();
        // x_t <= (pbar + eps) sum_group x and x_t >= (pbar - eps) sum_group x
        for r in &poly.intervals {
            let row = |m: f64, sign: f64| -> Terms { r.group.clone().map(|i| (i, sign * (if i == r.target { 1.0 - m } else { -m }))).collect() };
            if r.pbar + r.eps < 1.0 {
                les.push(row(r.pbar + r.eps, 1.0));
            }
            if r.pbar - r.eps > 0.0 {
                les.push(row(r.pbar - r.eps, -1.0));
            }
        }
        Self { n: poly.n_vars(), eqs, les, zeros: poly.zeros.clone() }
    }

    fn problem(&self, objective: &[f64]) -> Result<(Problem, Vec<Variable>)> {
        if self.n > MAX_LP_VARS {
            return config(format!("{} variables exceed the exact LP cap {MAX_LP_VARS}", self.n));
        }
        if objective.len() != self.n {
            return config("objective length does not match the system");
        }
        let mut zero = vec![false; self.n];
        for &i in &self.zeros {
            zero[i] = true;
        }
        let mut p = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<Variable> = (0..self.n).map(|i| p.add_var(objective[i], (0.0, if zero[i] { 0.0 } else { f64::INFINITY }))).collect();
        let lin = |t: &Terms| -> Vec<(Variable, f64)> { t.iter().map(|&(i, c)| (vars[i], c)).collect() };
        for (t, rhs) in &self.eqs {
            p.add_constraint(&lin(t)[..], ComparisonOp::Eq, *rhs);
        }
        for t in &self.les {
            p.add_constraint(&lin(t)[..], ComparisonOp::Le, 0.0);
        }
        Ok((p, vars))
    }

    /// `max <objective, x>`.
    pub fn maximize(&self, objective: &[f64]) -> Result<LpAnswer> {
        let (p, vars) = self.problem(objective)?;
        solve(&p, &vars)
    }

    /// Variables that are zero at every feasible point. Each LP solution
    /// marks every coordinate it makes positive, so few solves are needed.
    pub fn implied_zeros(&self) -> Result<Vec<bool>> {
        let mut positive = vec![false; self.n];
        let mut zero = vec![false; self.n];
        let mut c = vec![0.0; self.n];
        for i in 0..self.n {
            if positive[i] {
                continue;
            }
            c[i] = 1.0;
            let ans = self.maximize(&c)?;
            c[i] = 0.0;
            if ans.value <= 1e-12 {
                zero[i] = true;
            }
            for (p, v) in positive.iter_mut().zip(&ans.x) {
                *p |= *v > 1e-12;
            }
        }
        Ok(zero)
    }
}

fn solve(p: &Problem, vars: &[Variable]) -> Result<LpAnswer> {
    match p.solve() {
        Ok(sol) => Ok(LpAnswer { value: sol.objective(), x: vars.iter().map(|v| *sol.var_value(*v)).collect() }),
        Err(minilp::Error::Infeasible) => Err(Error::Solver { message: "certified infeasible by the exact LP".into(), residual: f64::INFINITY, best: None }),
        Err(minilp::Error::Unbounded) => Err(Error::Solver { message: "exact LP unbounded".into(), residual: f64::INFINITY, best: None }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpAnswer {
    pub value: f64,
    pub x: Vec<f64>,
}

/// `max <objective, x>` over the polytope.
pub fn exact_lp(poly: &ComPolytopeSpec, objective: &[f64]) -> Result<LpAnswer> {
    LinearSystem::from_polytope(poly).maximize(objective)
}

/// A point with every non-implied-zero coordinate and every inequality
/// slack at least `tau > 0`, and that `tau`.
pub fn strict_interior(sys: &LinearSystem, zero: &[bool]) -> Result<(Vec<f64>, f64)> {
    if sys.n > MAX_LP_VARS {
        return config(format!("{} variables exceed the exact LP cap {MAX_LP_VARS}", sys.n));
    }
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<Variable> = (0..sys.n).map(|i| p.add_var(0.0, (0.0, if zero[i] { 0.0 } else { f64::INFINITY }))).collect();
    let tau = p.add_var(1.0, (0.0, 1.0));
    for (t, rhs) in &sys.eqs {
        let row: Vec<(Variable, f64)> = t.iter().map(|&(i, c)| (vars[i], c)).collect();
        p.add_constraint(&row[..], ComparisonOp::Eq, *rhs);
    }
    for t in &sys.les {
        let mut row: Vec<(Variable, f64)> = t.iter().filter(|(i, _)| !zero[*i]).map(|&(i, c)| (vars[i], c)).collect();
        if row.is_empty() {
            continue;
        }
        row.push((tau, 1.0));
        p.add_constraint(&row[..], ComparisonOp::Le, 0.0);
    }
    for i in (0..sys.n).filter(|&i| !zero[i]) {
        p.add_constraint(&[(vars[i], 1.0), (tau, -1.0)][..], ComparisonOp::Ge, 0.0);
    }
    let mut all = vars.clone();
    all.push(tau);
    let ans = solve(&p, &all)?;
    let t = ans.x[sys.n];
    Ok((ans.x[..sys.n].to_vec(), t))
}
