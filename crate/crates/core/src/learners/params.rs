//! Default step sizes, exploration rates and their clamping.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamValue {
    pub name: &'static str,
    pub raw: f64,
    pub used: f64,
}

impl ParamValue {
    /// Clamps a formula value into `(0, 1]`.
    pub fn clamped(name: &'static str, raw: f64) -> Self {
        let used = if raw.is_finite() && raw > 0.0 { raw.min(1.0) } else if raw > 0.0 { 1.0 } else { f64::MIN_POSITIVE };
        Self { name, raw, used }
    }
}

/// `eta = gamma = 1 / sqrt(K A^(Lambda+1) S)`.
pub fn com_omd_default(k: usize, s: usize, a: usize, lambda: usize) -> f64 {
    let k = k.max(1) as f64;
    1.0 / (k * (a as f64).powi(lambda as i32 + 1) * s as f64).sqrt()
}

/// `(eta, xi, gamma)` for the unknown-steps meta learner.
pub fn meta_defaults(k: usize, h: usize, s: usize, a: usize, lambda: usize) -> (f64, f64, f64) {
    let (k, h, s, a, l) = (k.max(1) as f64, h as f64, s as f64, a as f64, lambda as f64);
    let eta = k.powf(-2.0 / 3.0) * h.powf(1.0 / 3.0) * s.powf(l / 3.0 - 1.0 / 3.0) * a.powf(-l / 3.0 - 1.0 / 3.0);
    let xi = k.powf(-1.0 / 3.0) * h.powf(2.0 / 3.0) * s.powf(2.0 * l / 3.0 + 1.0 / 3.0) * a.powf(l / 3.0 + 1.0 / 3.0);
    let gamma = k.powf(-1.0 / 3.0) * s.powf(-l / 3.0 - 2.0 / 3.0) * a.powf(-2.0 * l / 3.0 - 2.0 / 3.0);
    (eta, xi, gamma)
}

/// Hedge tuning for losses in `[0, H]`: `sqrt(8 ln N / K) / H`.
pub fn hedge_eta(n_policies: usize, k: usize, h: usize) -> f64 {
    (8.0 * (n_policies.max(2) as f64).ln() / k.max(1) as f64).sqrt() / h as f64
}

/// `sqrt(ln A / (A H K))`.
pub fn bf_eta(a: usize, h: usize, k: usize) -> f64 {
    ((a.max(2) as f64).ln() / (a as f64 * h as f64 * k.max(1) as f64)).sqrt()
}

/// `sqrt(S ln A / (K A^H H))`.
pub fn bb_eta(s: usize, a: usize, h: usize, k: usize) -> f64 {
    (s as f64 * (a.max(2) as f64).ln() / (k.max(1) as f64 * (a as f64).powi(h as i32) * h as f64)).sqrt()
}
