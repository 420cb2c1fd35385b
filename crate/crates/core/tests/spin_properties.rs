use proptest::prelude::*;
use superfocus_core::spin::{
    build_hamiltonian, commutator_with_z, eigensystem, heisenberg, overlap, rotate, singlet, triplet_zero,
    SpinParams, Subsystem,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heisenberg_chains_conserve_total_sz(
        n in 2usize..=4,
        couplings in prop::collection::vec(-3.0f64..3.0, 6),
    ) {
        let mut pairs = Vec::new();
        let mut c = couplings.iter();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j, *c.next().unwrap()));
            }
        }
        let h = heisenberg(n, &pairs);
        prop_assert!(commutator_with_z(&h).unwrap() <= 1e-13);
    }

    #[test]
    fn singlet_is_zero_field_ground_state(lambda in 1e-3f64..10.0) {
        let h = build_hamiltonian(&SpinParams { exchange: lambda, ..Default::default() });
        let eig = eigensystem(&h.matrix).unwrap();
        let (s, t0) = eig.singlet_triplet_levels();
        prop_assert!((s - eig.values[0]).abs() <= 1e-12 * lambda);
        prop_assert!(eig.values[1] - eig.values[0] > 0.5 * lambda);
        prop_assert!((t0 - s - lambda).abs() <= 1e-12 * lambda.max(1.0));
        // closed forms -3 lambda / 4 and lambda / 4
        prop_assert!((eig.level_of(&singlet()) + 0.75 * lambda).abs() <= 1e-12 * lambda.max(1.0));
        prop_assert!((eig.level_of(&triplet_zero()) - 0.25 * lambda).abs() <= 1e-12 * lambda.max(1.0));
    }

    #[test]
    fn hamiltonian_is_hermitian(
        os in -5.0f64..5.0, ol in -1.0f64..1.0, a in -1.0f64..1.0, b in -1.0f64..1.0, l in -1.0f64..1.0,
    ) {
        let h = build_hamiltonian(&SpinParams { omega_s: os, omega_l: ol, a_hyper: a, b_hyper: b, exchange: l, ..Default::default() });
        prop_assert!(h.hermiticity_defect() == 0.0);
        let eig = eigensystem(&h.matrix).unwrap();
        let trace: f64 = (0..4).map(|k| h.matrix[(k, k)].re).sum();
        prop_assert!((eig.values.iter().sum::<f64>() - trace).abs() < 1e-12);
    }

    #[test]
    fn overlap_decreases_with_displacement(b in std::f64::consts::FRAC_1_SQRT_2..4.0, d1 in 0.0f64..3.0, dd in 0.0f64..3.0) {
        // b = sqrt(1 + omega_s / omega_0)
        let omega_s = b * b - 1.0;
        let l1 = overlap(d1, 1.0, omega_s, 1.0, 1.0, 1.0).unwrap().l;
        let l2 = overlap(d1 + dd, 1.0, omega_s, 1.0, 1.0, 1.0).unwrap().l;
        prop_assert!(l2 <= l1);
        prop_assert!(l1 <= 1.0);
    }

    #[test]
    fn rotations_preserve_norm(angle in -7.0f64..7.0, ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0) {
        let s = rotate(&singlet(), Subsystem::Nuclear, [ax, ay, az], angle).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn overlap_is_unity_without_displacement() {
    for b2 in [0.5, 1.0, 3.0] {
        assert_eq!(overlap(0.0, 1.0, b2 - 1.0, 1.0, 1.0, 1.0).unwrap().l, 1.0);
    }
}

#[test]
fn full_rotation_flips_sign() {
    let s = rotate(&triplet_zero(), Subsystem::Electron, [0.0, 0.0, 1.0], std::f64::consts::TAU).unwrap();
    let diff = (s + triplet_zero()).norm();
    assert!(diff < 1e-14);
}
