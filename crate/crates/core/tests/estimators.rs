mod common;

use pamdp::conditions::{rho, ComSpace, ConditionMode, StepKind};
use pamdp::learners::{BbExp4, BfExp4, ComOmd, ComOmdParams, Feedback, Learner, ParamValue, UpperMode};
use pamdp::mdp::{simulate_episode, DeterministicPolicy, EpisodeRealization, MdpShape};
use pamdp::oracle::exact_estimator_expectation;
use pamdp::rng::StreamRng;
use pamdp::solvers::SolverOptions;
use proptest::prelude::*;

/// Learner after a few warm-up episodes so its policy is not uniform.
fn warmed_com(r: &mut StreamRng, sh: &MdpShape, gamma: f64) -> (ComOmd, pamdp::mdp::TransitionKernel) {
    let stat = common::kernel(r, sh);
    let p = ComOmdParams { eta: 1.0, gamma, delta: 0.1, k_total: 10, upper: UpperMode::Exact(stat.clone()), solver: SolverOptions::default() };
    let mut l = ComOmd::new(sh, ConditionMode::ActionBased, p).unwrap();
    for _ in 0..3 {
        let real = EpisodeRealization { kernel: common::episode_kernel(r, sh, &stat), losses: common::losses(r, sh) };
        let tr = simulate_episode(sh, &real, l.strategy(), r).unwrap();
        l.update(&tr).unwrap();
    }
    (l, stat)
}

/// `rho_c(p) l_h(s, x)` on every COM entry the policy can reach.
fn target(l: &ComOmd, real: &EpisodeRealization) -> Vec<(usize, f64, bool)> {
    let space: &ComSpace = &l.space;
    let lay = &space.layout;
    let mut out = Vec::new();
    for (h, st) in lay.steps.iter().enumerate() {
        if st.kind == StepKind::BlockInterior {
            continue;
        }
        for c in 0..st.n_cond {
            let rc = rho(space.conds.triplets(h, c), &real.kernel);
            for s in 0..space.shape.s {
                for x in 0..st.n_choice {
                    let reach = l.upper(pamdp::solvers::Coord { h, c, s, x }).unwrap() > 0.0;
                    let b = lay.base(h, c, s, x);
                    for i in b..b + st.resolve {
                        out.push((i, rc * real.losses.get(h, s, x), reach));
                    }
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn com_estimator_is_unbiased_under_the_exact_upper(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = common::shape(&mut r, 3, 2, 4, 2);
        let (l, stat) = warmed_com(&mut r, &sh, 0.0);
        let real = EpisodeRealization { kernel: common::episode_kernel(&mut r, &sh, &stat), losses: common::losses(&mut r, &sh) };
        let e = exact_estimator_expectation(&sh, &real, l.strategy(), |tr| l.estimate(tr)).unwrap();
        for (i, want, reach) in target(&l, &real) {
            if reach {
                prop_assert!((e[i] - want).abs() <= 1e-12, "entry {i}: {} vs {want}", e[i]);
            } else {
                prop_assert_eq!(e[i], 0.0);
            }
        }
    }

    #[test]
    fn implicit_exploration_biases_downward(seed in any::<u64>(), gamma in 0.001f64..0.5) {
        let mut r = common::rng(seed);
        let sh = common::shape(&mut r, 3, 2, 4, 2);
        let (l, stat) = warmed_com(&mut r, &sh, gamma);
        let real = EpisodeRealization { kernel: common::episode_kernel(&mut r, &sh, &stat), losses: common::losses(&mut r, &sh) };
        let e = exact_estimator_expectation(&sh, &real, l.strategy(), |tr| l.estimate(tr)).unwrap();
        for (i, want, _) in target(&l, &real) {
            prop_assert!(e[i] <= want + 1e-12);
            prop_assert!(e[i] >= 0.0);
        }
    }
}

fn eta() -> ParamValue {
    ParamValue { name: "eta", raw: 0.5, used: 0.5 }
}

fn small_shape() -> MdpShape {
    MdpShape::new(2, 2, 3, vec![1], 0).unwrap()
}

fn warm(l: &mut dyn Learner, sh: &MdpShape, r: &mut StreamRng) {
    for _ in 0..5 {
        let real = common::realization(r, sh);
        l.begin_episode(r).unwrap();
        let tr = simulate_episode(sh, &real, l.strategy(), r).unwrap();
        l.end_episode(&Feedback { trajectory: &tr, losses: None, kernel: Some(&real.kernel) }).unwrap();
    }
}

#[test]
fn bf_estimator_is_unbiased_on_reachable_pairs() {
    let sh = small_shape();
    let mut r = common::rng(21);
    let mut l = BfExp4::new(&sh, eta()).unwrap();
    warm(&mut l, &sh, &mut r);
    let real = common::realization(&mut r, &sh);
    let q = l.mixture_occupancy(&real.kernel);
    let mut e = vec![0.0; q.len()];
    for (i, &w) in l.rho().iter().enumerate() {
        let pol = DeterministicPolicy::from_index(sh.s, sh.a, sh.h, i);
        let ei = exact_estimator_expectation(&sh, &real, &pol, |tr| Ok(l.loss_estimate(tr, &real.kernel)?.0)).unwrap();
        e.iter_mut().zip(&ei).for_each(|(a, b)| *a += w * b);
    }
    for h in 0..sh.h {
        for s in 0..sh.s {
            for a in 0..sh.a {
                let i = (h * sh.s + s) * sh.a + a;
                let want = if q[i] > 0.0 { real.losses.get(h, s, a) } else { 0.0 };
                assert!((e[i] - want).abs() < 1e-10, "({h},{s},{a}): {} vs {want}", e[i]);
            }
        }
    }
}

#[test]
fn bb_estimator_is_constant_on_the_class_and_unbiased() {
    let sh = small_shape();
    let mut r = common::rng(22);
    let mut l = BbExp4::new(&sh, eta()).unwrap();
    warm(&mut l, &sh, &mut r);
    let real = common::realization(&mut r, &sh);
    let n = l.rho().len();
    let mut e = vec![0.0; n];
    for (i, &w) in l.rho().iter().enumerate() {
        let pol = DeterministicPolicy::from_index(sh.s, sh.a, sh.h, i);
        let ei = exact_estimator_expectation(&sh, &real, &pol, |tr| {
            let (v, _) = l.policy_estimates(tr)?;
            let m = l.matching(tr);
            let vals: Vec<f64> = v.iter().zip(&m).filter(|(_, b)| **b).map(|(x, _)| *x).collect();
            assert!(m[i]);
            assert!(vals.windows(2).all(|p| p[0] == p[1]));
            assert!(v.iter().zip(&m).all(|(x, b)| *b || *x == 0.0));
            Ok(v)
        })
        .unwrap();
        e.iter_mut().zip(&ei).for_each(|(a, b)| *a += w * b);
    }
    for (i, ei) in e.iter().enumerate() {
        let pol = DeterministicPolicy::from_index(sh.s, sh.a, sh.h, i);
        let v = pamdp::mdp::value_of_strategy(&sh, &real, &pol).unwrap();
        assert!((ei - v).abs() < 1e-10, "policy {i}: {ei} vs {v}");
    }
}
