use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superfocus_core::dynamics::{transverse_energy, Integrator};
use superfocus_core::phasespace::{estimate_transfer_matrix, Perturbation};
use superfocus_core::potential::HarmonicField;
use superfocus_core::{
    build_channel, propagate, CrystalConfig, InterpolatedField, PotentialField, PropagationOptions, ProtonState,
    StepSize,
};

fn exact() -> &'static PotentialField {
    static F: OnceLock<PotentialField> = OnceLock::new();
    F.get_or_init(|| PotentialField::new(build_channel(&CrystalConfig::default()).unwrap()))
}

fn table() -> &'static InterpolatedField {
    static T: OnceLock<InterpolatedField> = OnceLock::new();
    T.get_or_init(|| InterpolatedField::new(exact(), 64).unwrap())
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(3)
}

#[test]
fn harmonic_motion_matches_closed_form() {
    let h = HarmonicField::from_field(exact());
    let e = 1e6;
    let k = h.wavenumber(e);
    let (x0, p0) = (0.01, 2e-4);
    let s = ProtonState::new(x0, 0.0, p0, 0.0, e);
    let opts = PropagationOptions { step: StepSize::Fixed(0.02), ..PropagationOptions::conservative() };
    for z in [10.0, 50.0, 117.0] {
        let p = propagate(&s, &h, z, &opts, &mut rng()).unwrap();
        let x = x0 * (k * z).cos() + p0 / k * (k * z).sin();
        let phi = -x0 * k * (k * z).sin() + p0 * (k * z).cos();
        assert!((p.state.x - x).abs() < 1e-10, "z = {z}");
        assert!((p.state.phi_x - phi).abs() < 1e-10 * k, "z = {z}");
    }
}

#[test]
fn reversed_trajectory_returns_to_entry_point() {
    let opts = PropagationOptions::conservative();
    for (x, y, px, py) in [(0.03, -0.02, 1e-3, 0.0), (0.06, 0.01, -2e-3, 1.5e-3), (0.0, 0.07, 0.0, 0.0)] {
        let s = ProtonState::new(x, y, px, py, 1e6);
        let fwd = propagate(&s, exact(), 92.0, &opts, &mut rng()).unwrap();
        assert!(fwd.fate.is_channeled());
        let back = ProtonState { phi_x: -fwd.state.phi_x, phi_y: -fwd.state.phi_y, z: 0.0, ..fwd.state };
        let rev = propagate(&back, exact(), 92.0, &opts, &mut rng()).unwrap();
        assert!((rev.state.x - x).abs() < 1e-6 && (rev.state.y - y).abs() < 1e-6, "({x}, {y})");
        assert!((rev.state.phi_x + px).abs() < 1e-9 && (rev.state.phi_y + py).abs() < 1e-9);
    }
}

#[test]
fn transfer_matrix_is_symplectic_with_quadratic_convergence() {
    let r = ProtonState::new(0.005, 0.003, 0.0, 0.0, 1e6);
    let opts = PropagationOptions::conservative();
    let est = |h: f64| {
        estimate_transfer_matrix(exact(), 92.0, &r, Perturbation { position_nm: h, angle_rad: 0.03 * h }, &opts)
            .unwrap()
    };
    let coarse = est(2e-3);
    let fine = est(1e-3);
    for m in [&coarse, &fine] {
        assert!((m.determinant - 1.0).abs() <= 1e-3);
        assert!(m.symplectic_residual <= 1e-3);
    }
    assert!((coarse.determinant - 1.0).abs() >= 4.0 * (fine.determinant - 1.0).abs());
    assert!(coarse.symplectic_residual >= 4.0 * fine.symplectic_residual);
}

#[test]
fn integrators_agree() {
    let s = ProtonState::new(0.04, 0.02, 1e-3, -5e-4, 1e6);
    let rk = propagate(&s, exact(), 92.0, &PropagationOptions::conservative(), &mut rng()).unwrap();
    let gl_opts = PropagationOptions { integrator: Integrator::GaussLegendre2, ..PropagationOptions::conservative() };
    let gl = propagate(&s, exact(), 92.0, &gl_opts, &mut rng()).unwrap();
    assert!((rk.state.x - gl.state.x).abs() < 1e-9);
    assert!((rk.state.phi_y - gl.state.phi_y).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conservative_transport_keeps_transverse_energy(
        x in -0.08f64..0.08,
        y in -0.08f64..0.08,
        px in -3e-3f64..3e-3,
        py in -3e-3f64..3e-3,
    ) {
        let s = ProtonState::new(x, y, px, py, 1e6);
        let f = table();
        let e0 = transverse_energy(&s, f);
        let p = propagate(&s, f, 92.0, &PropagationOptions::conservative(), &mut rng()).unwrap();
        prop_assume!(p.fate.is_channeled());
        let e1 = transverse_energy(&p.state, f);
        prop_assert!(((e1 - e0) / e0).abs() <= 1e-6);
        prop_assert_eq!(p.state.e, 1e6);
    }

    #[test]
    fn transport_is_mirror_symmetric(x in 0.001f64..0.08, y in -0.08f64..0.08, px in -2e-3f64..2e-3) {
        let f = table();
        let opts = PropagationOptions::conservative();
        let a = propagate(&ProtonState::new(x, y, px, 0.0, 1e6), f, 40.0, &opts, &mut rng()).unwrap();
        let b = propagate(&ProtonState::new(-x, y, -px, 0.0, 1e6), f, 40.0, &opts, &mut rng()).unwrap();
        prop_assume!(a.fate.is_channeled() && b.fate.is_channeled());
        prop_assert!((a.state.x + b.state.x).abs() < 1e-9);
        prop_assert!((a.state.y - b.state.y).abs() < 1e-9);
    }

    #[test]
    fn dissipation_only_lowers_energy(x in -0.08f64..0.08, y in -0.08f64..0.08, seed in 0u64..1000) {
        let s = ProtonState::new(x, y, 0.0, 0.0, 1e6);
        let opts = PropagationOptions { step: StepSize::Fixed(0.5), ..Default::default() };
        let p = propagate(&s, table(), 92.0, &opts, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(p.state.e < 1e6);
        prop_assert!(p.state.e > 0.99e6);
    }
}
