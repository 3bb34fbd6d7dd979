//! JSON form of instances and per-episode realizations.
//!
//! Kernels are nested arrays `[h][s][a][s']`, losses `[h][s][a]`. Adversarial
//! steps are listed 1-based.

use serde::{Deserialize, Serialize};

use super::{EpisodeRealization, LossTable, MdpShape, TransitionKernel};
use crate::error::{config, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "H")]
    pub h: usize,
    #[serde(default)]
    pub adv_steps: Vec<usize>,
    #[serde(default)]
    pub s_init: usize,
    pub stationary_kernel: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeJson {
    pub kernel: Vec<Vec<Vec<Vec<f64>>>>,
    pub losses: Vec<Vec<Vec<f64>>>,
}

pub fn kernel_to_nested(k: &TransitionKernel) -> Vec<Vec<Vec<Vec<f64>>>> {
    (0..k.steps)
        .map(|h| (0..k.s).map(|s| (0..k.a).map(|a| k.row(h, s, a).to_vec()).collect()).collect())
        .collect()
}

pub fn kernel_from_nested(s: usize, a: usize, nested: &[Vec<Vec<Vec<f64>>>]) -> Result<TransitionKernel> {
    let mut k = TransitionKernel::zeros(s, a, nested.len());
    for (h, step) in nested.iter().enumerate() {
        if step.len() != s {
            return config(format!("kernel step {} has {} states, expected {s}", h + 1, step.len()));
        }
        for (x, acts) in step.iter().enumerate() {
            if acts.len() != a {
                return config(format!("kernel step {} state {x} has {} actions, expected {a}", h + 1, acts.len()));
            }
            for (y, row) in acts.iter().enumerate() {
                if row.len() != s {
                    return config(format!("kernel row at step {} ({x},{y}) has length {}", h + 1, row.len()));
                }
                k.row_mut(h, x, y).copy_from_slice(row);
            }
        }
    }
    Ok(k)
}

pub fn losses_to_nested(l: &LossTable) -> Vec<Vec<Vec<f64>>> {
    (0..l.h)
        .map(|h| (0..l.s).map(|s| (0..l.a).map(|a| l.get(h, s, a)).collect()).collect())
        .collect()
}

pub fn losses_from_nested(s: usize, a: usize, nested: &[Vec<Vec<f64>>]) -> Result<LossTable> {
    let mut l = LossTable::zeros(s, a, nested.len());
    for (h, step) in nested.iter().enumerate() {
        if step.len() != s || step.iter().any(|r| r.len() != a) {
            return config(format!("loss table step {} has the wrong dimensions", h + 1));
        }
        for (x, row) in step.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                l.set(h, x, y, v);
            }
        }
    }
    Ok(l)
}

impl InstanceJson {
    pub fn from_parts(shape: &MdpShape, kernel: &TransitionKernel) -> Self {
        Self {
            s: shape.s,
            a: shape.a,
            h: shape.h,
            adv_steps: shape.adv_one_based(),
            s_init: shape.s_init,
            stationary_kernel: kernel_to_nested(kernel),
        }
    }

    pub fn into_parts(&self) -> Result<(MdpShape, TransitionKernel)> {
        let shape = MdpShape::from_one_based(self.s, self.a, self.h, &self.adv_steps, self.s_init)?;
        let kernel = kernel_from_nested(self.s, self.a, &self.stationary_kernel)?;
        kernel.validate(&shape)?;
        Ok((shape, kernel))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl EpisodeJson {
    pub fn from_realization(r: &EpisodeRealization) -> Self {
        Self { kernel: kernel_to_nested(&r.kernel), losses: losses_to_nested(&r.losses) }
    }

    pub fn into_realization(&self, shape: &MdpShape) -> Result<EpisodeRealization> {
        let r = EpisodeRealization {
            kernel: kernel_from_nested(shape.s, shape.a, &self.kernel)?,
            losses: losses_from_nested(shape.s, shape.a, &self.losses)?,
        };
        r.validate(shape)?;
        Ok(r)
    }
}
