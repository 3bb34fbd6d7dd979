#![allow(dead_code)]

use pamdp::mdp::{EpisodeRealization, LossTable, MarkovPolicy, MdpShape, TransitionKernel};
use pamdp::rng::StreamRng;
use rand::{RngExt, SeedableRng};

pub fn rng(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

pub fn simplex(rng: &mut StreamRng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let t: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= t);
    let rest: f64 = v[1..].iter().sum();
    v[0] = 1.0 - rest;
    v
}

pub fn kernel(rng: &mut StreamRng, sh: &MdpShape) -> TransitionKernel {
    let mut k = TransitionKernel::for_shape(sh);
    for h in 0..sh.n_transitions() {
        for s in 0..sh.s {
            for a in 0..sh.a {
                let row = simplex(rng, sh.s);
                k.row_mut(h, s, a).copy_from_slice(&row);
            }
        }
    }
    k
}

/// Copy of `base` with fresh random rows at the adversarial steps.
pub fn episode_kernel(rng: &mut StreamRng, sh: &MdpShape, base: &TransitionKernel) -> TransitionKernel {
    let mut k = base.clone();
    for &h in &sh.adv_steps {
        for s in 0..sh.s {
            for a in 0..sh.a {
                let row = simplex(rng, sh.s);
                k.row_mut(h, s, a).copy_from_slice(&row);
            }
        }
    }
    k
}

pub fn losses(rng: &mut StreamRng, sh: &MdpShape) -> LossTable {
    let mut l = LossTable::for_shape(sh);
    l.l.iter_mut().for_each(|x| *x = rng.random());
    l
}

pub fn realization(rng: &mut StreamRng, sh: &MdpShape) -> EpisodeRealization {
    EpisodeRealization { kernel: kernel(rng, sh), losses: losses(rng, sh) }
}

pub fn policy(rng: &mut StreamRng, sh: &MdpShape) -> MarkovPolicy {
    let mut p = MarkovPolicy::uniform(sh.s, sh.a, sh.h);
    for i in 0..sh.h * sh.s {
        let d = simplex(rng, sh.a);
        p.pi[i * sh.a..(i + 1) * sh.a].copy_from_slice(&d);
    }
    p
}

/// Random shape with `S <= s_max`, `A <= a_max`, `H <= h_max`, at most
/// `lam_max` adversarial steps.
pub fn shape(rng: &mut StreamRng, s_max: usize, a_max: usize, h_max: usize, lam_max: usize) -> MdpShape {
    let s = rng.random_range(1..=s_max);
    let a = rng.random_range(1..=a_max);
    let h = rng.random_range(1..=h_max);
    let mut adv: Vec<usize> = (0..h.saturating_sub(1)).filter(|_| rng.random_bool(0.5)).collect();
    adv.truncate(lam_max);
    MdpShape::new(s, a, h, adv, rng.random_range(0..s)).unwrap()
}

/// Confidence box around a perturbation of `truth` that still contains it.
pub fn box_around(rng: &mut StreamRng, truth: &TransitionKernel, jitter: f64, slack: f64) -> pamdp::confidence::ConfidenceSet {
    let mut pbar = truth.clone();
    for h in 0..truth.steps {
        for s in 0..truth.s {
            for a in 0..truth.a {
                let row = pbar.row_mut(h, s, a);
                for v in row.iter_mut() {
                    *v = (*v + jitter * (rng.random::<f64>() - 0.5)).max(0.0);
                }
                let t: f64 = row.iter().sum();
                if t == 0.0 {
                    row.fill(1.0 / row.len() as f64);
                } else {
                    row.iter_mut().for_each(|v| *v /= t);
                }
            }
        }
    }
    let eps = truth.p.iter().zip(&pbar.p).map(|(p, q)| (p - q).abs() + slack * rng.random::<f64>() + 1e-9).collect();
    pamdp::confidence::ConfidenceSet { pbar, eps }
}

/// Random condition-dependent policy over a COM space.
pub fn table_policy(rng: &mut StreamRng, space: &std::sync::Arc<pamdp::conditions::ComSpace>) -> pamdp::conditions::TablePolicy {
    use pamdp::conditions::StepKind;
    let mut pol = pamdp::conditions::TablePolicy::uniform(space);
    let mut off = 0;
    for st in &space.layout.steps {
        if st.kind == StepKind::BlockInterior {
            continue;
        }
        for _ in 0..st.n_cond * space.shape.s {
            let d = simplex(rng, st.n_choice);
            pol.p[off..off + st.n_choice].copy_from_slice(&d);
            off += st.n_choice;
        }
    }
    pol
}
