use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use superfocus_core::dynamics::{multiple_scattering_kick, step_rk4};
use superfocus_core::potential::bessel::{bessel_k0, bessel_k1};
use superfocus_core::{
    build_channel, run_ensemble, BeamConfig, CrystalConfig, InterpolatedField, PotentialField, PropagationOptions,
    ProtonState, StepSize, TransverseField,
};

fn bessel(c: &mut Criterion) {
    let xs: Vec<f64> = (1..=64).map(|i| 0.05 * i as f64).collect();
    c.bench_function("bessel_k0_k1/64 points", |b| {
        b.iter(|| xs.iter().map(|&x| bessel_k0(black_box(x)).unwrap() + bessel_k1(x).unwrap()).sum::<f64>())
    });
}

fn fields(c: &mut Criterion) {
    let g = build_channel(&CrystalConfig::default()).unwrap();
    let exact = PotentialField::new(g);
    let table = InterpolatedField::new(&exact, 64).unwrap();
    let (x, y) = (0.031, -0.017);
    c.bench_function("gradient/exact", |b| b.iter(|| TransverseField::gradient(&exact, black_box(x), black_box(y))));
    c.bench_function("gradient/table", |b| b.iter(|| table.gradient(black_box(x), black_box(y))));

    let s = ProtonState::new(0.03, 0.01, 1e-3, -5e-4, 1e6);
    c.bench_function("rk4 step/table", |b| b.iter(|| step_rk4(black_box(&s), &table, 0.05)));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    c.bench_function("scattering kick/table", |b| {
        b.iter(|| multiple_scattering_kick(black_box(&s), &table, 0.05, &mut rng))
    });
}

fn ensemble(c: &mut Criterion) {
    let g = build_channel(&CrystalConfig::default()).unwrap();
    let table = InterpolatedField::new(&PotentialField::new(g.clone()), 64).unwrap();
    let beam = BeamConfig { n_protons: 200, divergence_mrad: 0.1, ..Default::default() };
    let opts = PropagationOptions { step: StepSize::Fixed(0.05), ..Default::default() };
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    group.bench_function("200 protons, 92 nm", |b| b.iter(|| run_ensemble(&beam, &g, &table, 92.0, &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, bessel, fields, ensemble);
criterion_main!(benches);
