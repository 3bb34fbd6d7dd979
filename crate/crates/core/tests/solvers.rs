mod common;

use pamdp::conditions::{com_from_policy, ComSpace, ConditionMode, StepKind};
use pamdp::confidence::{build_polytope, membership_check, ComPolytopeSpec};
use pamdp::mdp::MdpShape;
use pamdp::oracle::{barrier_kl, entropic_objective, exact_lp, LinearSystem};
use pamdp::rng::StreamRng;
use pamdp::solvers::{max_coordinate, max_coordinate_dp, omd_kl_step, Coord, SolverOptions};
use pamdp::conditions::Com;
use proptest::prelude::*;
use rand::RngExt;

const SHAPES: &[(usize, usize, usize, &[usize])] = &[
    (2, 2, 3, &[]),
    (2, 2, 3, &[0]),
    (2, 2, 3, &[1]),
    (2, 2, 4, &[1]),
    (3, 2, 3, &[]),
    (3, 2, 3, &[1]),
    (2, 3, 3, &[0]),
    (2, 2, 4, &[1, 2]),
];

/// Polytope around a perturbed kernel plus a feasible point in it.
fn random_case(r: &mut StreamRng, mode: ConditionMode) -> (ComPolytopeSpec, Com) {
    let pool: Vec<_> = SHAPES.iter().filter(|t| mode == ConditionMode::ActionBased || !t.3.is_empty()).collect();
    let &(s, a, h, adv) = pool[r.random_range(0..pool.len())];
    let sh = MdpShape::new(s, a, h, adv.to_vec(), r.random_range(0..s)).unwrap();
    let space = ComSpace::new(&sh, mode).unwrap();
    let stat = common::kernel(r, &sh);
    let conf = common::box_around(r, &stat, 0.3, 0.2);
    let poly = build_polytope(&space, &conf).unwrap();
    let pol = common::table_policy(r, &space);
    let prev = com_from_policy(&space, &stat, &pol).unwrap();
    (poly, prev)
}

fn mode_of(flag: bool) -> ConditionMode {
    if flag { ConditionMode::SubPolicy } else { ConditionMode::ActionBased }
}

fn coords(poly: &ComPolytopeSpec) -> Vec<Coord> {
    let sp = &poly.space;
    let mut out = Vec::new();
    for (h, st) in sp.layout.steps.iter().enumerate() {
        if st.kind == StepKind::BlockInterior {
            continue;
        }
        for c in 0..st.n_cond {
            for s in 0..sp.shape.s {
                for x in 0..st.n_choice {
                    out.push(Coord { h, c, s, x });
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coordinate_maximum_matches_exact_lp(seed in any::<u64>(), sub in any::<bool>()) {
        let mut r = common::rng(seed);
        let (poly, _) = random_case(&mut r, mode_of(sub));
        prop_assume!(poly.n_vars() <= 200);
        let lay = &poly.space.layout;
        let opts = SolverOptions::default();
        for k in coords(&poly) {
            let mut obj = vec![0.0; poly.n_vars()];
            let b = lay.base(k.h, k.c, k.s, k.x);
            obj[b..b + lay.steps[k.h].resolve].fill(1.0);
            let want = exact_lp(&poly, &obj).unwrap().value;
            let got = max_coordinate(&poly, k, &opts).unwrap();
            let dp = max_coordinate_dp(&poly, k).unwrap();
            prop_assert!((got - want).abs() <= 1e-8, "{k:?}: {got} vs {want}");
            prop_assert!((dp - want).abs() <= 1e-8, "{k:?}: dp {dp} vs {want}");
            let lam = poly.space.conds.lambda_at(k.h) as i32;
            prop_assert!(got <= (poly.space.shape.s as f64).powi(lam) + 1e-9);
        }
    }

    #[test]
    fn mirror_step_matches_barrier_oracle(seed in any::<u64>(), sub in any::<bool>(), eta in 0.05f64..2.0) {
        let mut r = common::rng(seed);
        let (poly, prev) = random_case(&mut r, mode_of(sub));
        prop_assume!(poly.n_vars() <= 200);
        let loss: Vec<f64> = (0..poly.n_vars()).map(|_| if r.random_bool(0.3) { r.random::<f64>() * 5.0 } else { 0.0 }).collect();
        let out = omd_kl_step(&poly, &prev, &loss, eta, &SolverOptions::default()).unwrap();
        prop_assert!(out.residual <= 1e-8, "residual {}", out.residual);
        let rep = membership_check(&poly, &out.com, 1e-8).unwrap();
        prop_assert!(rep.member, "{rep:?}");

        let y: Vec<f64> = prev.v.iter().map(|v| v.max(1e-12)).collect();
        let sys = LinearSystem::from_polytope(&poly);
        let truth = barrier_kl(&sys, &y, &loss, eta, 1e-10).unwrap();
        let f_ours = entropic_objective(&out.com.v, &y, &loss, eta);
        let f_true = entropic_objective(&truth.x, &y, &loss, eta);
        prop_assert!((f_ours - f_true).abs() <= 1e-6, "{f_ours} vs {f_true}");
    }

    #[test]
    fn mirror_step_never_increases_the_linear_loss(seed in any::<u64>(), sub in any::<bool>(), eta in 0.05f64..5.0) {
        let mut r = common::rng(seed);
        let (poly, prev) = random_case(&mut r, mode_of(sub));
        let loss: Vec<f64> = (0..poly.n_vars()).map(|_| r.random::<f64>()).collect();
        let out = omd_kl_step(&poly, &prev, &loss, eta, &SolverOptions::default()).unwrap();
        let dot = |x: &[f64]| x.iter().zip(&loss).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!(dot(&out.com.v) <= dot(&prev.v) + 1e-6);
        let y: Vec<f64> = prev.v.iter().map(|v| v.max(1e-12)).collect();
        prop_assert!(entropic_objective(&out.com.v, &y, &loss, eta) <= entropic_objective(&prev.v, &y, &loss, eta) + 1e-6);
    }
}

#[test]
fn zero_loss_returns_a_feasible_prior() {
    let mut r = common::rng(9);
    for sub in [false, true] {
        let (poly, prev) = random_case(&mut r, mode_of(sub));
        let out = omd_kl_step(&poly, &prev, &vec![0.0; poly.n_vars()], 1.0, &SolverOptions::default()).unwrap();
        for (a, b) in out.com.v.iter().zip(&prev.v) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
