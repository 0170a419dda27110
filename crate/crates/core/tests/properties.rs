use linplan::game::{f, game_finalize, hamming, wcirc_check, GameParams, SignVector, OUTPUT_LEN};
use linplan::hard::{HardMdp, HardMdpParams, HardState, Variant};
use linplan::linalg::{augment, dot, kron_all, tensor_power};
use linplan::mdp::Mdp;
use linplan::oracle::grid_oracle_optimistic;
use linplan::rng::Streams;
use linplan::tensorplan::{optimistic_select, residual, ConstraintTensor, SolverConfig};
use proptest::prelude::*;

fn sign_vector(p: usize) -> impl Strategy<Value = SignVector> {
    any::<u64>().prop_map(move |b| SignVector::from_bits(b, p))
}

fn wstar_vector(p: usize) -> impl Strategy<Value = SignVector> {
    sign_vector(p).prop_filter("admissible secret", linplan::game::in_wstar)
}

fn permutation(p: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..p).collect::<Vec<_>>()).prop_shuffle()
}

fn factor(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d + 1)
}

proptest! {
    #[test]
    fn hamming_is_a_metric(p in 1usize..=64, x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
        let (x, y, z) = (SignVector::from_bits(x, p), SignVector::from_bits(y, p), SignVector::from_bits(z, p));
        let dxy = hamming(&x, &y).unwrap();
        prop_assert_eq!(dxy, hamming(&y, &x).unwrap());
        prop_assert_eq!(hamming(&x, &x).unwrap(), 0);
        prop_assert_eq!(dxy == 0, x == y);
        prop_assert!(dxy <= hamming(&x, &z).unwrap() + hamming(&z, &y).unwrap());
        prop_assert!(dxy as usize <= p);
    }

    #[test]
    fn f_is_invariant_under_coordinate_permutation(
        (_p, perm, secret, seq) in (4usize..=16).prop_flat_map(|p| (
            Just(p),
            permutation(p),
            wstar_vector(p),
            prop::collection::vec(sign_vector(p), 0..6),
        ))
    ) {
        let moved: Vec<SignVector> = seq.iter().map(|w| w.permuted(&perm)).collect();
        let base = f(&seq, &secret);
        let perm_f = f(&moved, &secret.permuted(&perm));
        prop_assert_eq!(wcirc_check(&seq), wcirc_check(&moved));
        match (base, perm_f) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "validity differs: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn constraint_tensor_identity(
        (theta, factors) in (1usize..=3, 1usize..=3).prop_flat_map(|(d, a)| (
            prop::collection::vec(-2.0f64..2.0, d),
            prop::collection::vec(factor(d), a),
        ))
    ) {
        let c = ConstraintTensor::new(factors.clone());
        let direct: f64 = factors.iter().map(|f| residual(f, &theta)).product();
        let via_tensor = dot(&kron_all(&factors), &tensor_power(&augment(&theta), factors.len()));
        let flat = c.eval_flat(&theta).unwrap();
        let scale = 1.0 + direct.abs();
        prop_assert!((c.eval(&theta) - direct).abs() <= 1e-12 * scale);
        prop_assert!((via_tensor - direct).abs() <= 1e-12 * scale);
        prop_assert!((flat - direct).abs() <= 1e-12 * scale);
    }

    #[test]
    fn more_constraints_never_raise_the_grid_optimum(
        (objective, cs, tol) in (1usize..=2).prop_flat_map(|d| (
            prop::collection::vec(-1.0f64..1.0, d),
            prop::collection::vec(prop::collection::vec(factor(d), 1..=2), 1..=3),
            0.0f64..0.3,
        ))
    ) {
        let cs: Vec<ConstraintTensor> = cs.into_iter().map(ConstraintTensor::new).collect();
        let mut prev = f64::INFINITY;
        for k in 0..=cs.len() {
            let r = grid_oracle_optimistic(&objective, &cs[..k], 1.0, tol, 40).unwrap();
            let value = if r.theta.is_some() { r.value } else { f64::NEG_INFINITY };
            prop_assert!(value <= prev);
            prev = value;
            let looser = grid_oracle_optimistic(&objective, &cs[..k], 1.0, 2.0 * tol + 1e-3, 40).unwrap();
            if r.theta.is_some() {
                prop_assert!(looser.value >= r.value);
            }
        }
    }

    #[test]
    fn game_payoff_never_beats_the_empty_sequence_p4(
        secret in wstar_vector(4),
        raw in prop::collection::vec(sign_vector(4), OUTPUT_LEN),
    ) {
        // At p = 4 only repeats are close, so nudging a repeat makes the output admissible.
        let mut prev = SignVector::ones(4);
        let output: Vec<SignVector> = raw
            .into_iter()
            .map(|w| {
                let w = if w == prev { w.flipped(0) } else { w };
                prev = w;
                w
            })
            .collect();
        prop_assert!(wcirc_check(&output));
        let params = GameParams::new(4, 3, secret).unwrap();
        let pay = game_finalize(&params, &output).unwrap();
        prop_assert!(pay <= f(&[], &secret).unwrap() + 1e-15);
    }

    #[test]
    fn hard_features_do_not_depend_on_the_secret(
        (p, s1, s2, actions) in (4usize..=8).prop_flat_map(|p| (
            Just(p),
            wstar_vector(p),
            wstar_vector(p),
            prop::collection::vec(0..p, 1..40),
        ))
    ) {
        let params = HardMdpParams::desk(p, 3, Variant::Q).unwrap();
        let m1 = HardMdp::new(params, s1).unwrap();
        let m2 = HardMdp::new(params, s2).unwrap();
        let mut s = m1.initial_state();
        for a in actions {
            let HardState::Node(_) = &s else { break };
            prop_assert_eq!(m1.phi_v_of(&s), m2.phi_v_of(&s));
            for b in 0..p {
                prop_assert_eq!(m1.phi_q_of(&s, b), m2.phi_q_of(&s, b));
            }
            s = s.child(&params, a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_grid_on_small_problems(
        (objective, cs, seed) in (
            prop::collection::vec(-1.0f64..1.0, 2),
            prop::collection::vec(prop::collection::vec(factor(2), 1..=2), 1..=2),
            any::<u64>(),
        )
    ) {
        let cs: Vec<ConstraintTensor> = cs.into_iter().map(ConstraintTensor::new).collect();
        let tol = 0.02;
        let grid = grid_oracle_optimistic(&objective, &cs, 1.0, tol, 200).unwrap();
        let mut rng = Streams::new(seed).stream("solver", 0);
        let sel = optimistic_select(&cs, &objective, 1.0, tol, 0.0, None, &SolverConfig::default(), &mut rng);
        if sel.feasible {
            prop_assert!(dot(&sel.theta, &sel.theta).sqrt() <= 1.0 + 1e-9);
            for c in &cs {
                prop_assert!(c.eval(&sel.theta).abs() <= tol * (1.0 + 1e-9));
            }
        }
        if grid.theta.is_some() {
            prop_assert!(sel.feasible);
            prop_assert!(sel.value >= grid.value - 0.05, "solver {} grid {}", sel.value, grid.value);
        }
    }
}

#[test]
fn game_payoff_maximum_is_the_empty_sequence_p2() {
    let p = 2;
    let points: Vec<SignVector> = (0..4).map(|b| SignVector::from_bits(b, p)).collect();
    for secret in linplan::game::enumerate_wstar(p).unwrap() {
        let params = GameParams::new(p, 3, secret).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut idx = [0usize; OUTPUT_LEN];
        loop {
            let output: Vec<SignVector> = idx.iter().map(|&i| points[i]).collect();
            if wcirc_check(&output) {
                best = best.max(game_finalize(&params, &output).unwrap());
            }
            let mut j = 0;
            while j < OUTPUT_LEN {
                idx[j] += 1;
                if idx[j] < points.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == OUTPUT_LEN {
                break;
            }
        }
        assert_eq!(best, f(&[], &secret).unwrap(), "secret {secret}");
    }
}
