//! Log-log regret slope.

use crate::error::{config, Result};

/// Regret values are floored here before taking logs.
pub const REGRET_FLOOR: f64 = 1e-9;
pub const MIN_POINTS: usize = 10;

/// Least-squares slope of `log R_k` against `log k` over `k >= k_min`.
/// `points` holds `(k, R_k)` with `k >= 1`.
pub fn slope(points: &[(usize, f64)], k_min: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, _)| *k >= k_min.max(1))
        .map(|&(k, r)| ((k as f64).ln(), r.max(REGRET_FLOOR).ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return config(format!("slope needs at least {MIN_POINTS} points with k >= {k_min}, got {}", pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}
