//! Randomized properties, 1000 cases each.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netdecide::classification::{update_belief, Event};
use netdecide::decision::{quorum_prob, translate_neighbor_g, DecisionParams};
use netdecide::markov::{absorbing_reachable, build_exact_chain};
use netdecide::mobility::{update_motion, AgentPose, MotionParams, Vec2};
use netdecide::network::{bias_limit, generate_topology, ModelPair, ObservedAssignment};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bias_limit_is_permutation_equivariant(
        raw in prop::collection::vec((0.01f64..1.0, 0u8..2), 2..20),
        shuffle_seed in any::<u64>(),
    ) {
        let models = ModelPair::from_slices(&[5.0, -5.0, 5.0, 5.0], &[5.0, 5.0, -5.0, 5.0]).unwrap();
        let total: f64 = raw.iter().map(|r| r.0).sum();
        let c = DVector::from_iterator(raw.len(), raw.iter().map(|r| r.0 / total));
        let f = ObservedAssignment::new(raw.iter().map(|r| r.1).collect()).unwrap();
        let mut perm: Vec<usize> = (0..raw.len()).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let cp = DVector::from_iterator(raw.len(), perm.iter().map(|&i| c[i]));
        let fp = ObservedAssignment::new(perm.iter().map(|&i| f.get(i)).collect()).unwrap();
        let a = bias_limit(&c, &models, &f).unwrap();
        let b = bias_limit(&cp, &models, &fp).unwrap();
        prop_assert!((a - b).amax() <= 1e-12);
    }

    #[test]
    fn quorum_increases_with_support(n_k in 2usize..60, k in 1u32..8, beta in 0.1f64..10.0) {
        let q: Vec<f64> = (1..=n_k).map(|n_g| quorum_prob(n_g, n_k, k, beta)).collect();
        // strict until the value rounds to exactly 1.0
        prop_assert!(q.windows(2).all(|w| w[0] < w[1] || (w[0] == 1.0 && w[1] == 1.0)), "{:?}", q);
        prop_assert_eq!(q[n_k - 1], 1.0);
    }

    #[test]
    fn quorum_increases_with_exponent(n_k in 2usize..60, pick in 0.0f64..1.0, k in 1u32..12) {
        // majority support, n_g > n_k / 2 and n_g < n_k
        let lo = n_k / 2 + 1;
        prop_assume!(lo < n_k);
        let n_g = lo + ((n_k - lo) as f64 * pick) as usize;
        prop_assume!(n_g < n_k);
        let (a, b) = (quorum_prob(n_g, n_k, k, 1.0), quorum_prob(n_g, n_k, k + 1, 1.0));
        prop_assert!(b > a || (a == 1.0 && b == 1.0), "{} then {}", a, b);
    }

    #[test]
    fn belief_converges_geometrically(b0 in 0.0f64..=1.0, alpha in 0.0f64..1.0, steps in 1usize..200) {
        let (mut up, mut down) = (b0, b0);
        for _ in 0..steps {
            up = update_belief(up, Event::Agree, alpha);
            down = update_belief(down, Event::Disagree, alpha);
        }
        let ratio = alpha.powi(steps as i32);
        prop_assert!(((1.0 - up) - ratio * (1.0 - b0)).abs() <= 1e-12);
        prop_assert!((down - ratio * b0).abs() <= 1e-12);
        prop_assert_eq!(update_belief(b0, Event::NoUpdate, alpha), b0);
    }

    #[test]
    fn translation_is_an_involution(g in 0u8..2, f in 0u8..2) {
        prop_assert_eq!(translate_neighbor_g(translate_neighbor_g(g, f), f), g);
        prop_assert_eq!(translate_neighbor_g(g, 1), g);
    }

    #[test]
    fn exact_chains_absorb_in_unanimity(n in 2usize..8, seed in any::<u64>(), k in 1u32..6) {
        let topo = generate_topology(n, 2.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let chain = build_exact_chain(&topo, &DecisionParams::with_k(k)).unwrap();
        prop_assert_eq!(chain.absorbing_states(), vec![0, (1 << n) - 1]);
        prop_assert!(absorbing_reachable(&chain).unwrap());
    }

    #[test]
    fn goal_seeking_never_moves_away(
        x in (-50.0f64..50.0, -50.0f64..50.0),
        target in (-50.0f64..50.0, -50.0f64..50.0),
        lambda in 0.01f64..2.0,
        dt in 0.01f64..0.5,
    ) {
        let params = MotionParams { dt, lambda, beta: 0.0, gamma: 0.0, ..MotionParams::default() };
        let w = Vec2::new(target.0, target.1);
        let pose = AgentPose::at_rest(Vec2::new(x.0, x.1));
        let before = (w - pose.x).norm();
        prop_assume!(dt * lambda < before);
        let next = update_motion(&pose, &w, &[], &[], &Vec2::zeros(), &params);
        let after = (w - next.x).norm();
        prop_assert!(after <= before);
        prop_assert!((before - after - dt * lambda).abs() <= 1e-9);
    }
}
