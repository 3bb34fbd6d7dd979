//! Log-barrier Newton method for `min eta <l, x> + KL(x || y)` over a
//! `LinearSystem`, used as ground truth for the mirror-descent solver.
//!
//! Equalities are removed by a null-space parametrization; implied zeros
//! are found by LP first so the remaining set has a strict interior.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::lp::{strict_interior, LinearSystem};
use crate::error::{config, Error, Result};

#[derive(Debug, Clone)]
pub struct BarrierAnswer {
    pub x: Vec<f64>,
    pub objective: f64,
    pub newton_steps: usize,
}

/// `sum_i eta l_i x_i + x_i ln(x_i / y_i) - x_i + y_i`.
pub fn entropic_objective(x: &[f64], y: &[f64], loss: &[f64], eta: f64) -> f64 {
    let mut f = 0.0;
    for i in 0..x.len() {
        f += eta * loss[i] * x[i] - x[i] + y[i];
        if x[i] > 0.0 {
            f += x[i] * (x[i] / y[i]).ln();
        }
    }
    f
}

struct Reduced {
    free: Vec<usize>,
    x0: DVector<f64>,
    null: DMatrix<f64>,
    /// Inequality rows on the free coordinates.
    ineq: Vec<DVector<f64>>,
}

fn reduce(sys: &LinearSystem, zero: &[bool], x0_full: &[f64]) -> Reduced {
    let free: Vec<usize> = (0..sys.n).filter(|&i| !zero[i]).collect();
    let mut pos = vec![usize::MAX; sys.n];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let m = free.len();
    let mut a = DMatrix::zeros(sys.eqs.len(), m);
    for (r, (t, _)) in sys.eqs.iter().enumerate() {
        for &(i, c) in t {
            if pos[i] != usize::MAX {
                a[(r, pos[i])] += c;
            }
        }
    }
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1.0);
    let cols: Vec<usize> = (0..m).filter(|&j| eig.eigenvalues[j] <= 1e-10 * top).collect();
    let mut null = DMatrix::zeros(m, cols.len());
    for (k, &j) in cols.iter().enumerate() {
        null.set_column(k, &eig.eigenvectors.column(j));
    }
    let ineq = sys
        .les
        .iter()
        .filter_map(|t| {
            let mut v = DVector::zeros(m);
            for &(i, c) in t {
                if pos[i] != usize::MAX {
                    v[pos[i]] += c;
                }
            }
            (v.amax() > 0.0).then_some(v)
        })
        .collect();
    let x0 = DVector::from_iterator(m, free.iter().map(|&i| x0_full[i]));
    Reduced { free, x0, null, ineq }
}

/// Solves to duality gap `gap` on the barrier path. `y` must be positive
/// wherever the system allows a positive coordinate.
pub fn barrier_kl(sys: &LinearSystem, y: &[f64], loss: &[f64], eta: f64, gap: f64) -> Result<BarrierAnswer> {
    if y.len() != sys.n || loss.len() != sys.n {
        return config("iterate or loss does not match the system");
    }
    let zero = sys.implied_zeros()?;
    let (start, tau) = strict_interior(sys, &zero)?;
    if tau <= 1e-9 {
        return Err(Error::Solver { message: "system has no strict interior after removing implied zeros".into(), residual: tau, best: None });
    }
    let red = reduce(sys, &zero, &start);
    let m = red.free.len();
    let yf = DVector::from_iterator(m, red.free.iter().map(|&i| y[i]));
    if yf.iter().any(|v| !(*v > 0.0)) {
        return config("reference point must be positive on the free coordinates");
    }
    let lf = DVector::from_iterator(m, red.free.iter().map(|&i| eta * loss[i]));
    let k = red.null.ncols();
    let mut z = DVector::<f64>::zeros(k);
    let point = |z: &DVector<f64>| &red.x0 + &red.null * z;
    let feasible = |x: &DVector<f64>| x.iter().all(|v| *v > 0.0) && red.ineq.iter().all(|g| g.dot(x) < 0.0);
    let value = |x: &DVector<f64>, t: f64| -> f64 {
        let mut f = 0.0;
        for i in 0..m {
            f += lf[i] * x[i] + x[i] * (x[i] / yf[i]).ln() - x[i];
        }
        t * f - red.ineq.iter().map(|g| (-g.dot(x)).ln()).sum::<f64>()
    };
    let n_ineq = red.ineq.len();
    let mut t = 1.0;
    let mut steps = 0;
    loop {
        for _ in 0..200 {
            let x = point(&z);
            let mut grad = DVector::zeros(m);
            let mut hess = DMatrix::zeros(m, m);
            for i in 0..m {
                grad[i] = t * (lf[i] + (x[i] / yf[i]).ln());
                hess[(i, i)] = t / x[i];
            }
            for g in &red.ineq {
                let s = -g.dot(&x);
                grad.axpy(1.0 / s, g, 1.0);
                hess.ger(1.0 / (s * s), g, g, 1.0);
            }
            let gz = red.null.transpose() * &grad;
            let hz = red.null.transpose() * &hess * &red.null;
            let dz = match newton_direction(hz, &gz) {
                Some(d) => d,
                None => return Err(Error::Solver { message: "reduced Hessian not positive definite".into(), residual: f64::NAN, best: None }),
            };
            let dec = -gz.dot(&dz);
            steps += 1;
            if dec <= 1e-22 * t.max(1.0) || k == 0 {
                break;
            }
            let f0 = value(&x, t);
            let mut alpha = 1.0;
            loop {
                let zn = &z + &dz * alpha;
                let xn = point(&zn);
                // near the optimum rounding in the value hides the decrease
                if feasible(&xn) && (dec < 1e-10 || value(&xn, t) <= f0 - 0.25 * alpha * dec) {
                    z = zn;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    break;
                }
            }
            if alpha < 1e-20 {
                break;
            }
        }
        if n_ineq == 0 || n_ineq as f64 / t <= gap {
            break;
        }
        t *= 20.0;
    }
    let xr = point(&z);
    let mut x = vec![0.0; sys.n];
    for (k, &i) in red.free.iter().enumerate() {
        x[i] = xr[k];
    }
    let objective = entropic_objective(&x, y, loss, eta);
    Ok(BarrierAnswer { x, objective, newton_steps: steps })
}

/// `-H^{-1} g`; an eigen solve with clamped spectrum when late barrier
/// stages leave `H` too ill-conditioned for Cholesky.
fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(-ch.solve(g));
    }
    let eig = SymmetricEigen::new(h);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let floor = top * 1e-15;
    let proj = eig.eigenvectors.transpose() * g;
    let scaled = DVector::from_iterator(proj.len(), proj.iter().zip(eig.eigenvalues.iter()).map(|(p, l)| -p / l.max(floor)));
    Some(&eig.eigenvectors * scaled)
}
