mod common;

use pamdp::conditions::{
    com_from_policy, com_to_om, enumerate_conditions, matched_subpolicies, rho_subpolicy, rho_table, ComSpace, ConditionMode, SubPolicySet,
};
use pamdp::mdp::{conditioned_occupancy_forward, MdpShape};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn com_decomposes_into_the_occupancy(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = common::shape(&mut r, 3, 2, 4, 2);
        let space = ComSpace::new(&sh, ConditionMode::ActionBased).unwrap();
        let stat = common::kernel(&mut r, &sh);
        let pk = common::episode_kernel(&mut r, &sh, &stat);
        let pol = common::table_policy(&mut r, &space);
        let com = com_from_policy(&space, &stat, &pol).unwrap();
        let q = com_to_om(&com, &pk);
        let fwd = conditioned_occupancy_forward(&sh, &pk, &pol).unwrap();
        for (a, b) in q.l.iter().zip(&fwd.l) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn subpolicy_com_decomposes_into_the_occupancy(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let s = r_range(&mut r, 1, 2);
        let a = r_range(&mut r, 1, 2);
        let h = r_range(&mut r, 3, 4);
        let lam = r_range(&mut r, 1, h - 2);
        let start = r_range(&mut r, 0, h - 1 - lam);
        let sh = MdpShape::new(s, a, h, (start..start + lam).collect(), 0).unwrap();
        let space = ComSpace::new(&sh, ConditionMode::SubPolicy).unwrap();
        let stat = common::kernel(&mut r, &sh);
        let pk = common::episode_kernel(&mut r, &sh, &stat);
        let pol = common::table_policy(&mut r, &space);
        let com = com_from_policy(&space, &stat, &pol).unwrap();
        let q = com_to_om(&com, &pk);
        let fwd = conditioned_occupancy_forward(&sh, &pk, &pol).unwrap();
        for (a, b) in q.l.iter().zip(&fwd.l) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn rho_mass_is_bounded(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = common::shape(&mut r, 3, 2, 5, 3);
        let conds = enumerate_conditions(&sh, ConditionMode::ActionBased).unwrap();
        let k = common::kernel(&mut r, &sh);
        for h in 0..sh.h {
            let tot: f64 = rho_table(&conds, h, &k).iter().sum();
            let cap = ((sh.s * sh.a) as f64).powi(sh.lambda_before(h) as i32);
            prop_assert!(tot <= cap + 1e-9);
        }
    }

    #[test]
    fn subpolicy_outcomes_form_a_distribution(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sh = MdpShape::new(2, 2, 4, vec![1, 2], 0).unwrap();
        let k = common::kernel(&mut r, &sh);
        let set = SubPolicySet::new(2, 2, 1, 3, 1 << 20).unwrap();
        for s in 0..2 {
            for sigma in 0..set.count() {
                let t: f64 = (0..2).map(|s2| rho_subpolicy(s, sigma, s2, &k, &set)).sum();
                prop_assert!((t - 1.0).abs() < 1e-12);
            }
        }
    }
}

fn r_range(r: &mut pamdp::rng::StreamRng, lo: usize, hi: usize) -> usize {
    use rand::RngExt;
    r.random_range(lo..=hi)
}

#[test]
fn consecutive_block_rho_mass_is_s_times_a_to_the_lambda() {
    for (s, a, lam) in [(2, 2, 1), (2, 2, 2), (3, 2, 2), (2, 3, 3)] {
        let sh = MdpShape::new(s, a, lam + 2, (1..=lam).collect(), 0).unwrap();
        let conds = enumerate_conditions(&sh, ConditionMode::ActionBased).unwrap();
        let mut r = common::rng(7);
        let k = common::kernel(&mut r, &sh);
        let tot: f64 = rho_table(&conds, lam + 1, &k).iter().sum();
        let want = (s * a.pow(lam as u32)) as f64;
        assert!((tot - want).abs() < 1e-9, "S={s} A={a} L={lam}: {tot} vs {want}");
    }
}

#[test]
fn enumeration_is_deterministic() {
    let sh = MdpShape::from_one_based(3, 2, 5, &[2, 3], 1).unwrap();
    let a = enumerate_conditions(&sh, ConditionMode::ActionBased).unwrap();
    let b = enumerate_conditions(&sh, ConditionMode::ActionBased).unwrap();
    assert_eq!(a, b);
    for h in 0..sh.h {
        for id in 0..a.count(h) {
            assert_eq!(a.triplets(h, id), b.triplets(h, id));
            assert_eq!(a.id_of(h, &a.condition(h, id)), Some(id));
        }
    }
}

#[test]
fn condition_counts() {
    let one = MdpShape::from_one_based(2, 2, 3, &[1], 0).unwrap();
    let c = enumerate_conditions(&one, ConditionMode::ActionBased).unwrap();
    assert_eq!(c.count(0), 1);
    assert_eq!(c.count(1), 8);
    let two = MdpShape::from_one_based(2, 2, 4, &[1, 2], 0).unwrap();
    let c = enumerate_conditions(&two, ConditionMode::ActionBased).unwrap();
    assert_eq!(c.count(3), 32);
}

#[test]
fn matched_class_has_a_to_the_s_minus_one_members() {
    for (s, a) in [(2, 2), (3, 2), (2, 3)] {
        let set = SubPolicySet::new(s, a, 0, 1, 1 << 20).unwrap();
        for st in 0..s {
            for act in 0..a {
                let m = matched_subpolicies(&[st], &[act], &set);
                assert_eq!(m.len(), a.pow(s as u32 - 1));
            }
        }
    }
}
