use pamdp::conditions::ConditionMode;
use pamdp::learners::{ComOmd, ComOmdParams, UpperMode};
use pamdp::mdp::{simulate_episode, EpisodeRealization, LossTable, MdpShape, TransitionKernel};
use pamdp::oracle::om_omd::ReferenceOmOmd;
use pamdp::rng::RngStreams;
use pamdp::solvers::SolverOptions;
use rand::RngExt;

#[test]
fn stationary_com_omd_tracks_reference_om_omd() {
    let sh = MdpShape::new(2, 2, 3, vec![], 0).unwrap();
    let streams = RngStreams::new(11);
    let mut g = streams.stream("instance");
    let mut kernel = TransitionKernel::zeros(2, 2, 2);
    for h in 0..2 {
        for s in 0..2 {
            for a in 0..2 {
                let p: f64 = g.random_range(0.1..0.9);
                kernel.row_mut(h, s, a).copy_from_slice(&[p, 1.0 - p]);
            }
        }
    }
    // default step sizes 1/sqrt(K A S)
    let (eta, gamma, k_total) = (0.025, 0.025, 400);
    let p = ComOmdParams { eta, gamma, delta: 0.1, k_total, upper: UpperMode::Policy, solver: SolverOptions::default() };
    let mut com = ComOmd::new(&sh, ConditionMode::ActionBased, p).unwrap();
    let mut refl = ReferenceOmOmd::new(&sh, eta, gamma, 0.1, k_total).unwrap();
    let mut play = streams.stream("play");
    let mut worst: f64 = 0.0;
    for _ in 0..k_total {
        let mut losses = LossTable::zeros(2, 2, 3);
        for l in losses.l.iter_mut() {
            *l = g.random();
        }
        let r = EpisodeRealization { kernel: kernel.clone(), losses };
        let tr = simulate_episode(&sh, &r, com.policy(), &mut play).unwrap();
        com.update(&tr).unwrap();
        refl.update(&tr).unwrap();
        let rp = refl.policy();
        for h in 0..3 {
            for s in 0..2 {
                for (a, v) in com.act(h, 0, s).iter().enumerate() {
                    worst = worst.max((v - rp.prob(h, s, a)).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-8, "max policy gap {worst}");
}
