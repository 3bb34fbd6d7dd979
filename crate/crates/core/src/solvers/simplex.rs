//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Sized for the small polytopes used when an exact coordinate maximum is
//! wanted; cost grows with rows times columns per pivot.

const EPS: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible { phase_one: f64 },
    Unbounded,
    /// Pivot budget exhausted, typically degenerate cycling in floating point.
    IterationLimit,
}

enum Phase {
    Done,
    Unbounded,
    Stalled,
}

/// `max c^T x` subject to `eq` rows `= rhs`, `le` rows `<= rhs`, `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub n: usize,
    pub c: Vec<f64>,
    pub eq: Vec<(Vec<(usize, f64)>, f64)>,
    pub le: Vec<(Vec<(usize, f64)>, f64)>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.t[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.t[pr * w + pc];
        for j in 0..w {
            self.t[pr * w + j] /= p;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[r * w + j] -= f * prow[j];
            }
            self.t[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Maximizes `obj` over the current basis, restricted to `allowed`
    /// entering columns.
    fn optimize(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool) -> Phase {
        let budget = 50 * (self.rows + self.cols) + 1000;
        for _ in 0..budget {
            // reduced costs d_j = c_j - c_B^T column_j
            let mut enter = None;
            for j in 0..self.cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut d = obj[j];
                for r in 0..self.rows {
                    d -= obj[self.basis[r]] * self.at(r, j);
                }
                if d > EPS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(pc) = enter else { return Phase::Done };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    match best {
                        Some((br, bv)) if ratio > bv + EPS || (ratio >= bv - EPS && self.basis[r] > self.basis[br]) => {}
                        _ => best = Some((r, ratio)),
                    }
                }
            }
            match best {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return Phase::Unbounded,
            }
        }
        Phase::Stalled
    }

    fn value(&self, obj: &[f64]) -> f64 {
        (0..self.rows).map(|r| obj[self.basis[r]] * self.rhs(r)).sum()
    }
}

impl LpProblem {
    pub fn solve(&self) -> LpOutcome {
        let n = self.n;
        let n_le = self.le.len();
        let m = self.eq.len() + n_le;
        // columns: originals, slacks (one per le row), artificials (one per row)
        let cols = n + n_le + m;
        let w = cols + 1;
        let mut t = vec![0.0; m * w];
        let mut basis = vec![0; m];
        let rows = self.eq.iter().map(|(r, b)| (r, *b, None)).chain(self.le.iter().enumerate().map(|(k, (r, b))| (r, *b, Some(k))));
        for (i, (row, rhs, slack)) in rows.enumerate() {
            let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
            for &(j, c) in row.iter() {
                t[i * w + j] += sign * c;
            }
            if let Some(k) = slack {
                t[i * w + n + k] = sign;
            }
            t[i * w + n + n_le + i] = 1.0;
            t[i * w + cols] = sign * rhs;
            basis[i] = n + n_le + i;
        }
        let mut tab = Tableau { rows: m, cols, t, basis };

        let mut phase1 = vec![0.0; cols];
        for j in n + n_le..cols {
            phase1[j] = -1.0;
        }
        if let Phase::Stalled = tab.optimize(&phase1, &|_| true) {
            return LpOutcome::IterationLimit;
        }
        let infeas = -tab.value(&phase1);
        if infeas > 1e-9 {
            return LpOutcome::Infeasible { phase_one: infeas };
        }
        // drive zero-level artificials out of the basis
        for r in 0..m {
            if tab.basis[r] >= n + n_le {
                if let Some(j) = (0..n + n_le).find(|&j| tab.at(r, j).abs() > 1e-9) {
                    tab.pivot(r, j);
                }
            }
        }
        let mut obj = vec![0.0; cols];
        obj[..n].copy_from_slice(&self.c);
        let art = n + n_le;
        match tab.optimize(&obj, &|j| j < art) {
            Phase::Done => {}
            Phase::Unbounded => return LpOutcome::Unbounded,
            Phase::Stalled => return LpOutcome::IterationLimit,
        }
        let mut x = vec![0.0; n];
        for r in 0..m {
            if tab.basis[r] < n {
                x[tab.basis[r]] = tab.rhs(r);
            }
        }
        LpOutcome::Optimal { value: self.c.iter().zip(&x).map(|(c, v)| c * v).sum(), x }
    }
}
