mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::{nonzero_rational, perturb, random_polynomial, random_shallow, rng, slots, Slot};
use reluk::certify::{certify_equal, Status, Target};
use reluk::deep::compile_deep;
use reluk::embed::embed_shallow;
use reluk::exact::rational::{int, ratio, to_f64};
use reluk::exact::Polynomial;
use reluk::network::{CommonDenominatorNetwork, FloatNetwork, Network};
use reluk::points::random_ball;
use reluk::shallow::compile_shallow;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shallow_compilation_is_proven(seed in any::<u64>(), d in 1usize..=2, k in 2u32..=4, b in prop::sample::select(vec![(1, 1), (2, 1), (1, 3)])) {
        let mut r = rng(seed);
        let p = random_polynomial(&mut r, d, k, 6);
        let net = Network::Shallow(compile_shallow(&p, k, &ratio(b.0, b.1)).unwrap());
        prop_assert_eq!(certify_equal(&net, &Target::Polynomial(&p)).status, Status::Proven);
        for x in random_ball(d, 10, 30, seed) {
            prop_assert_eq!(net.eval_exact(&x).unwrap(), p.eval(&x).unwrap());
        }
    }

    #[test]
    fn deep_compilation_is_proven(seed in any::<u64>(), d in 1usize..=2, depth in 1u32..=3) {
        let mut r = rng(seed);
        let p = random_polynomial(&mut r, d, 2u32.pow(depth), 5);
        let net = Network::Deep(compile_deep(&p, 2, depth, &int(1)).unwrap());
        prop_assert_eq!(certify_equal(&net, &Target::Polynomial(&p)).status, Status::Proven);
        let fast = CommonDenominatorNetwork::new(&net);
        for x in random_ball(d, 10, 30, seed) {
            let v = p.eval(&x).unwrap();
            prop_assert_eq!(net.eval_exact(&x).unwrap(), v.clone());
            prop_assert_eq!(fast.eval(&x), v);
        }
    }

    #[test]
    fn float_evaluation_tracks_exact(seed in any::<u64>(), d in 1usize..=2, depth in 1u32..=3) {
        let mut r = rng(seed);
        let p = random_polynomial(&mut r, d, 2u32.pow(depth), 5);
        let net = Network::Deep(compile_deep(&p, 2, depth, &int(1)).unwrap());
        let float = FloatNetwork::new(&net);
        for x in random_ball(d, 25, 64, seed) {
            let xf: Vec<f64> = x.iter().map(to_f64).collect();
            let exact = to_f64(&p.eval(&x).unwrap());
            // Rounding scales with the size of the summands, not the sum.
            let scale: f64 = float.terms(&xf).iter().map(|t| t.abs()).sum();
            prop_assert!((float.eval(&xf) - exact).abs() <= 1e-10 * scale.max(exact.abs()) + f64::MIN_POSITIVE);
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), deep in any::<bool>()) {
        let mut r = rng(seed);
        let p = random_polynomial(&mut r, 2, 4, 4);
        let net = if deep {
            Network::Deep(compile_deep(&p, 2, 2, &ratio(2, 3)).unwrap())
        } else {
            Network::Shallow(compile_shallow(&p, 4, &ratio(1, 3)).unwrap())
        };
        let text = net.to_json();
        let back = Network::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.declared_bounds(), net.declared_bounds());
        for x in random_ball(2, 5, 20, seed) {
            prop_assert_eq!(back.eval_exact(&x).unwrap(), net.eval_exact(&x).unwrap());
        }
        prop_assert_eq!(Polynomial::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn output_mutations_are_refuted(seed in any::<u64>(), d in 1usize..=2) {
        let mut r = rng(seed);
        let p = random_polynomial(&mut r, d, 4, 5);
        let net = Network::Deep(compile_deep(&p, 2, 2, &int(1)).unwrap());
        let outputs: Vec<Slot> = slots(&net).into_iter().filter(|s| matches!(s, Slot::Output { .. })).collect();
        let slot = *outputs.choose(&mut r).unwrap();
        let mutated = perturb(&net, slot, &nonzero_rational(&mut r, 3, 5));
        prop_assert_ne!(certify_equal(&mutated, &Target::Polynomial(&p)).status, Status::Proven);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn embedding_matches_at_a_thousand_points(seed in any::<u64>(), k in 2u32..=3, level in 1u32..=2, extra in 0u32..=1, n in 1usize..=3, d in 1usize..=2) {
        let mut r = rng(seed);
        let f = random_shallow(&mut r, k.pow(level), n, d);
        let deep = Network::Deep(embed_shallow(&f, k, level + extra).unwrap());
        let shallow = Network::Shallow(f.clone());
        for x in random_ball(d, 1000, 50, r.gen()) {
            prop_assert_eq!(deep.eval_exact(&x).unwrap(), shallow.eval_exact(&x).unwrap());
        }
        prop_assert_eq!(certify_equal(&deep, &Target::Shallow(&f)).status, Status::Proven);
        prop_assert!(deep.layers().iter().all(|l| l.width() == 2 * (k as usize + 1) * n));
    }
}
