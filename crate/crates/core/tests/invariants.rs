use std::f64::consts::PI;

use proptest::prelude::*;
use trisym::kinematics::{from_jacobi, permutation_action, state_shape, to_jacobi, wrap_angle};
use trisym::potentials::potential_value;
use trisym::{Permutation, PotentialModel, ThreeBodyState, Vec2};

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0_f64
}

prop_compose! {
    fn state()(p in prop::array::uniform12(coord())) -> ThreeBodyState {
        let v = |i: usize| Vec2::new(p[i], p[i + 1]);
        ThreeBodyState::new(0.0, [v(0), v(2), v(4)], [v(6), v(8), v(10)], 1.0).unwrap()
    }
}

fn separated(s: &ThreeBodyState) -> bool {
    s.pair_distances().iter().all(|&d| d > 0.05)
}

proptest! {
    #[test]
    fn shape_is_rotation_and_translation_invariant(s in state(), a in -PI..PI, dx in coord(), dy in coord()) {
        prop_assume!(separated(&s));
        let p = state_shape(&s).unwrap();
        let mut moved = s.rotated(a);
        for x in moved.x.iter_mut() {
            *x += Vec2::new(dx, dy);
        }
        let q = state_shape(&moved).unwrap();
        prop_assert!((p.hyper_radius - q.hyper_radius).abs() < 1e-9 * p.hyper_radius);
        prop_assert!((p.r - q.r).abs() < 1e-9);
        prop_assert!((p.yp - q.yp).abs() < 1e-9);
        if p.r > 1e-6 {
            prop_assert!(wrap_angle(p.phi - q.phi).abs() < 1e-6);
        }
    }

    #[test]
    fn mirror_flips_orientation(s in state()) {
        prop_assume!(separated(&s));
        let p = state_shape(&s).unwrap();
        let q = state_shape(&s.mirrored()).unwrap();
        prop_assert!((p.yp + q.yp).abs() < 1e-12);
        prop_assert!((p.r - q.r).abs() < 1e-12);
    }

    #[test]
    fn cyclic_relabelling_rotates_phi_by_a_third(s in state()) {
        prop_assume!(separated(&s));
        let p = state_shape(&s).unwrap();
        prop_assume!(p.r > 1e-6);
        let plus = state_shape(&permutation_action(&s, Permutation::CyclicPlus)).unwrap();
        let minus = state_shape(&permutation_action(&s, Permutation::CyclicMinus)).unwrap();
        let dp = wrap_angle(plus.phi - p.phi);
        let dm = wrap_angle(minus.phi - p.phi);
        prop_assert!((dp.abs() - 2.0 * PI / 3.0).abs() < 1e-6);
        prop_assert!((dp + dm).abs() < 1e-6);
        prop_assert!((plus.r - p.r).abs() < 1e-9 && (plus.yp - p.yp).abs() < 1e-9);
    }

    #[test]
    fn transpositions_reverse_orientation(s in state(), k in 3usize..6) {
        prop_assume!(separated(&s));
        let g = Permutation::ALL[k];
        let p = state_shape(&s).unwrap();
        let q = state_shape(&permutation_action(&s, g)).unwrap();
        prop_assert!((p.yp + q.yp).abs() < 1e-9);
        prop_assert!((p.r - q.r).abs() < 1e-9);
    }

    #[test]
    fn jacobi_round_trip(s in state()) {
        let back = from_jacobi(&to_jacobi(&s), s.m);
        let rel = s.to_relative_frame();
        for i in 0..3 {
            prop_assert!((back.x[i] - rel.x[i]).norm() < 1e-12);
            prop_assert!((back.v[i] - rel.v[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn potentials_are_symmetric_and_homogeneous(s in state(), k in 0usize..6, a in -PI..PI, scale in 0.2..5.0_f64) {
        prop_assume!(separated(&s));
        let cases = [
            (PotentialModel::newton(), -1),
            (PotentialModel::delta_string(), 1),
            (PotentialModel::y_string(), 1),
        ];
        for (model, degree) in cases {
            let v = potential_value(&model, &s.x).unwrap();
            let tol = 1e-10 * v.abs().max(1.0);
            let permuted = permutation_action(&s, Permutation::ALL[k]);
            prop_assert!((potential_value(&model, &permuted.x).unwrap() - v).abs() < tol);
            prop_assert!((potential_value(&model, &s.rotated(a).x).unwrap() - v).abs() < tol);
            let scaled = s.x.map(|x| x * scale);
            let vs = potential_value(&model, &scaled).unwrap();
            prop_assert!((vs - scale.powi(degree) * v).abs() < tol * scale.powi(degree).max(1.0));
        }
    }

    #[test]
    fn permutation_group_laws(a in 0usize..6, b in 0usize..6) {
        let (g, h) = (Permutation::ALL[a], Permutation::ALL[b]);
        prop_assert_eq!(g.then(g.inverse()), Permutation::Identity);
        prop_assert_eq!(g.then(h).inverse(), h.inverse().then(g.inverse()));
        prop_assert_eq!(g.is_transposition() != h.is_transposition(), g.then(h).is_transposition());
    }
}
