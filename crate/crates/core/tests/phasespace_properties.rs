use nalgebra::Matrix4;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use superfocus_core::phasespace::{
    find_peaks, flux_enhancement, fwhm, invariants, profile_fwhm, symplectic_j, symplectic_residual, Axis,
};
use superfocus_core::{DensityGrid, Plane, Window};

/// A symplectic matrix built from 2x2 unit-determinant blocks and a
/// coupling rotation of both planes.
fn symplectic(a: f64, b: f64, c: f64, d: f64, theta: f64) -> Matrix4<f64> {
    let (s, co) = theta.sin_cos();
    let blocks = Matrix4::new(
        a, b, 0.0, 0.0, //
        c, (1.0 + b * c) / a, 0.0, 0.0, //
        0.0, 0.0, d, 0.0, //
        0.0, 0.0, 0.0, 1.0 / d,
    );
    // rotation of (x, y) with the same rotation on (px, py)
    let rot = Matrix4::new(
        co, 0.0, -s, 0.0, //
        0.0, co, 0.0, -s, //
        s, 0.0, co, 0.0, //
        0.0, s, 0.0, co,
    );
    rot * blocks
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn invariants_survive_symplectic_conjugation(
        a in 0.3f64..3.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.3f64..3.0, theta in 0.0f64..6.3,
        diag in prop::array::uniform4(0.5f64..2.0), off in -0.2f64..0.2,
    ) {
        let m = symplectic(a, b, c, d, theta);
        prop_assert!(symplectic_residual(&m) < 1e-12);
        let mut sigma = Matrix4::from_diagonal(&diag.into());
        sigma[(0, 1)] = off;
        sigma[(1, 0)] = off;
        let moved = m * sigma * m.transpose();
        let (i0, d0) = invariants(&sigma);
        let (i1, d1) = invariants(&moved);
        prop_assert!((i0 - i1).abs() <= 1e-9 * i0.abs());
        prop_assert!((d0 - d1).abs() <= 1e-9 * d0.abs());
    }

    #[test]
    fn symplectic_form_is_antisymmetric_and_unimodular(k in 1usize..5) {
        let j = symplectic_j();
        prop_assert_eq!(j.transpose(), -j);
        prop_assert_eq!(j.pow(2 * k as u32), if k % 2 == 0 { Matrix4::identity() } else { -Matrix4::identity() });
    }

    #[test]
    fn flux_enhancement_doubling_shift(phi in 1e-5f64..1e-3) {
        let (a0, e, k) = (0.01, 1e6, 1445.0);
        let g1 = flux_enhancement(a0, e, phi, k).unwrap();
        let g2 = flux_enhancement(a0, e, 2.0 * phi, k).unwrap();
        prop_assert!((g1 - g2 - 2.0 * std::f64::consts::LN_2).abs() <= 1e-12);
    }

    #[test]
    fn box_profile_fwhm_is_its_width(lo in 5usize..40, w in 3usize..40) {
        let mut p = vec![0.0; 100];
        for v in &mut p[lo..lo + w] {
            *v = 7.0;
        }
        let f = profile_fwhm(&p, 1.0).unwrap();
        prop_assert!((f - w as f64).abs() <= 1.0);
    }
}

#[test]
fn gaussian_fwhm_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut grid = DensityGrid::new(Plane::Configuration, 200, 4, Window::new(-5.0, 5.0, -1.0, 1.0).unwrap()).unwrap();
    for _ in 0..1_000_000 {
        let x: f64 = StandardNormal.sample(&mut rng);
        grid.add(x, 0.0);
    }
    // 2 sqrt(2 ln 2)
    let oracle = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt();
    let f = fwhm(&grid, Axis::X).unwrap();
    assert!((f / oracle - 1.0).abs() < 0.02, "{f}");
}

#[test]
fn two_gaussian_mixture_has_two_peaks() {
    let p: Vec<f64> = (0..128)
        .map(|i| {
            let x = i as f64 - 64.0;
            (-(x + 20.0).powi(2) / 50.0).exp() + 0.8 * (-(x - 20.0).powi(2) / 50.0).exp()
        })
        .collect();
    let peaks = find_peaks(&p, 0.1);
    assert_eq!(peaks.len(), 2);
    assert_eq!(peaks[0].index, 44);
    assert_eq!(peaks[1].index, 84);
}
