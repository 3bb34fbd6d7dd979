mod common;

use pamdp::conditions::{com_from_policy, Com, ComSpace, ConditionMode};
use pamdp::confidence::{build_polytope, confidence_radius, initial_com, membership_check, ConfidenceSet, VisitCounts};
use pamdp::learners::{ComOmd, ComOmdParams, Learner, UpperMode};
use pamdp::mdp::{simulate_episode, EpisodeRealization, LossTable, MarkovPolicy, MdpShape};
use pamdp::solvers::SolverOptions;
use proptest::prelude::*;

fn expected_mass(sh: &MdpShape, mode: ConditionMode, h: usize) -> f64 {
    let lam = sh.lambda_before(h);
    match mode {
        ConditionMode::ActionBased => (sh.s as f64).powi(lam as i32),
        ConditionMode::SubPolicy if lam == sh.lambda() && lam > 0 => sh.s as f64,
        ConditionMode::SubPolicy => 1.0,
    }
}

fn check_mass(com: &Com, mode: ConditionMode, tol: f64) {
    let sh = &com.space.shape;
    for h in 0..sh.h {
        if com.space.layout.steps[h].len == 0 {
            continue;
        }
        let m = com.step_mass(h);
        let want = expected_mass(sh, mode, h);
        assert!((m - want).abs() <= tol, "step {h}: mass {m}, want {want}");
    }
}

fn block_shape(r: &mut pamdp::rng::StreamRng) -> MdpShape {
    use rand::RngExt;
    let h = r.random_range(3..=4);
    let lam = r.random_range(1..=h - 2);
    let start = r.random_range(0..=h - 1 - lam);
    MdpShape::new(r.random_range(1..=2), r.random_range(1..=2), h, (start..start + lam).collect(), 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn true_kernel_com_is_a_member(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = common::shape(&mut r, 3, 2, 4, 2);
        let stat = common::kernel(&mut r, &sh);
        let conf = common::box_around(&mut r, &stat, 0.2, 0.2);
        prop_assert!(conf.contains(&sh, &stat));
        let space = ComSpace::new(&sh, ConditionMode::ActionBased).unwrap();
        let pol = common::table_policy(&mut r, &space);
        let com = com_from_policy(&space, &stat, &pol).unwrap();
        let poly = build_polytope(&space, &conf).unwrap();
        let rep = membership_check(&poly, &com, 1e-9).unwrap();
        prop_assert!(rep.member, "{rep:?}");
        check_mass(&com, ConditionMode::ActionBased, 1e-9);
    }

    #[test]
    fn true_kernel_subpolicy_com_is_a_member(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = block_shape(&mut r);
        let stat = common::kernel(&mut r, &sh);
        let conf = common::box_around(&mut r, &stat, 0.2, 0.2);
        let space = ComSpace::new(&sh, ConditionMode::SubPolicy).unwrap();
        let pol = common::table_policy(&mut r, &space);
        let com = com_from_policy(&space, &stat, &pol).unwrap();
        let poly = build_polytope(&space, &conf).unwrap();
        let rep = membership_check(&poly, &com, 1e-9).unwrap();
        prop_assert!(rep.member, "{rep:?}");
        check_mass(&com, ConditionMode::SubPolicy, 1e-9);
    }

    #[test]
    fn initial_points_are_members(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = common::shape(&mut r, 3, 3, 4, 2);
        let vac = ConfidenceSet::vacuous(&sh);
        let fresh = ConfidenceSet::from_counts(&VisitCounts::new(&sh), 100, 0.1).unwrap();
        let space = ComSpace::new(&sh, ConditionMode::ActionBased).unwrap();
        let mu = initial_com(&space);
        for conf in [&vac, &fresh] {
            let rep = membership_check(&build_polytope(&space, conf).unwrap(), &mu, 1e-12).unwrap();
            prop_assert!(rep.member, "{rep:?}");
        }
        check_mass(&mu, ConditionMode::ActionBased, 1e-12);

        let sh = block_shape(&mut r);
        let space = ComSpace::new(&sh, ConditionMode::SubPolicy).unwrap();
        let mu = initial_com(&space);
        let rep = membership_check(&build_polytope(&space, &ConfidenceSet::vacuous(&sh)).unwrap(), &mu, 1e-12).unwrap();
        prop_assert!(rep.member, "{rep:?}");
        check_mass(&mu, ConditionMode::SubPolicy, 1e-12);
    }

    #[test]
    fn radius_shrinks_with_visits(p in 0.0f64..=1.0, n in 1u64..100_000, k in 1usize..100_000) {
        let a = confidence_radius(p, n, k, 3, 2, 0.1).unwrap();
        let b = confidence_radius(p, n + 1, k, 3, 2, 0.1).unwrap();
        prop_assert!(b <= a);
        prop_assert!(a > 0.0);
    }
}

#[test]
fn subpolicy_mass_profile_is_one_one_s() {
    let sh = MdpShape::from_one_based(3, 2, 4, &[2], 0).unwrap();
    let space = ComSpace::new(&sh, ConditionMode::SubPolicy).unwrap();
    let mut r = common::rng(3);
    let pol = common::table_policy(&mut r, &space);
    let com = com_from_policy(&space, &common::kernel(&mut r, &sh), &pol).unwrap();
    let masses: Vec<f64> = [0, 1, 2].iter().map(|&h| com.step_mass(h)).collect();
    for (m, want) in masses.iter().zip([1.0, 1.0, 3.0]) {
        assert!((m - want).abs() < 1e-12, "{masses:?}");
    }
}

#[test]
fn empirical_kernel_converges() {
    let sh = MdpShape::new(3, 2, 3, vec![], 0).unwrap();
    let mut r = common::rng(11);
    let truth = common::kernel(&mut r, &sh);
    let real = EpisodeRealization { kernel: truth.clone(), losses: LossTable::for_shape(&sh) };
    let pol = MarkovPolicy::uniform(3, 2, 3);
    let mut counts = VisitCounts::new(&sh);
    for _ in 0..20_000 {
        counts.update(&simulate_episode(&sh, &real, &pol, &mut r).unwrap());
    }
    let emp = counts.empirical();
    for h in 0..sh.n_transitions() {
        for s in 0..3 {
            for a in 0..2 {
                let n = counts.n(h, s, a);
                if h == 0 && s != sh.s_init {
                    assert_eq!(n, 0);
                    continue;
                }
                assert!(n > 100);
                for s2 in 0..3 {
                    let p = truth.get(h, s, a, s2);
                    let se = (p * (1.0 - p) / n as f64).sqrt();
                    assert!((emp.get(h, s, a, s2) - p).abs() <= 5.0 * se + 1e-12, "({h},{s},{a},{s2})");
                }
            }
        }
    }
}

#[test]
fn solver_iterates_keep_mass_and_membership() {
    let sh = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
    let mut r = common::rng(5);
    let stat = common::kernel(&mut r, &sh);
    for mode in [ConditionMode::ActionBased, ConditionMode::SubPolicy] {
        let params = ComOmdParams { eta: 0.3, gamma: 0.05, delta: 0.1, k_total: 40, upper: UpperMode::Policy, solver: SolverOptions::default() };
        let mut l = ComOmd::new(&sh, mode, params).unwrap();
        for _ in 0..40 {
            let real = EpisodeRealization { kernel: common::episode_kernel(&mut r, &sh, &stat), losses: common::losses(&mut r, &sh) };
            let tr = simulate_episode(&sh, &real, l.strategy(), &mut r).unwrap();
            l.update(&tr).unwrap();
            check_mass(l.com(), mode, 1e-7);
            let poly = build_polytope(&l.space, l.confidence()).unwrap();
            let rep = membership_check(&poly, l.com(), 1e-7).unwrap();
            assert!(rep.member, "{mode:?}: {rep:?}");
        }
    }
}
