//! Side-by-side timing of the data-parallel kernels against their
//! sequential twins.
//!
//! With the default `parallel` feature the dispatched matrix product splits
//! output rows across the rayon pool and the closed-form Kerr fill splits
//! over cells; without the feature (or on a single-core host) both entries
//! of each pair time the same serial kernel, so parity is the expected
//! reading there. Run `cargo bench -p qxform` and
//! `cargo bench -p qxform --no-default-features` to compare the two builds
//! through criterion's saved baselines.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use qxform::detmat::{general_sample, DetRng};
use qxform::fock::{coherent_state, DensityMatrix};
use qxform::kerr::{analytic_solution, KerrParams};

fn matrix_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix_product");
    group.sample_size(10);
    group.warm_up_time(Duration::from_secs(1));
    group.measurement_time(Duration::from_secs(2));
    for &dim in &[64usize, 128, 192] {
        let mut rng = DetRng::new(42);
        let a = general_sample(dim, &mut rng);
        let b = general_sample(dim, &mut rng);
        group.bench_with_input(BenchmarkId::new("dispatched", dim), &dim, |bench, _| {
            bench.iter(|| black_box(a.mul(&b).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("serial", dim), &dim, |bench, _| {
            bench.iter(|| black_box(a.mul_serial(&b).unwrap()))
        });
    }
    group.finish();
}

fn kerr_closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("kerr_closed_form");
    group.sample_size(10);
    group.warm_up_time(Duration::from_secs(1));
    group.measurement_time(Duration::from_secs(2));
    for &n in &[32usize, 48] {
        let params = KerrParams {
            chi: 0.5,
            gamma: 0.1,
            n_fock: n,
        };
        let psi = coherent_state(n, Complex64::new(1.0, 0.0)).unwrap();
        let rho0 = DensityMatrix::pure(&psi).unwrap();
        group.bench_with_input(BenchmarkId::new("analytic", n), &n, |bench, _| {
            bench.iter(|| black_box(analytic_solution(&params, &rho0, 1.0).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, matrix_product, kerr_closed_form);
criterion_main!(benches);
