//! Parallel vs sequential throughput of the data-parallel batches.
//!
//! The default entry points run on rayon when the `parallel` feature is
//! enabled (it is by default); the `*_serial` functions are the sequential
//! reference paths with bit-identical results.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use unsharp_core::effects::DensityOperator;
use unsharp_core::observables::{
    coexist_binary_povms, coexist_binary_povms_serial, pauli_x, pauli_z, pvm_from_observable,
    unsharp_spin, SearchBudget,
};
use unsharp_core::random;
use unsharp_core::simulator::{
    sample_outcomes, sample_outcomes_serial, sequential_measurement, sequential_measurement_serial,
    EnsembleConfig,
};

fn bench_born_sampling(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let rho = random::random_density(4, &mut rng);
    let povm = random::random_povm(4, 4, &mut rng).unwrap();

    let mut group = c.benchmark_group("born_sampling");
    for &samples in &[10_000u64, 100_000] {
        let config = EnsembleConfig::new(rho.clone(), povm.clone(), samples, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", samples), &config, |b, cfg| {
            b.iter(|| sample_outcomes(cfg).unwrap());
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", samples),
            &config,
            |b, cfg| {
                b.iter(|| sample_outcomes_serial(cfg).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_trajectory_ensemble(c: &mut Criterion) {
    let up = DensityOperator::basis(2, 0).unwrap();
    let z = pvm_from_observable(&pauli_z(), 1e-8)
        .unwrap()
        .to_generalized();
    let x = pvm_from_observable(&pauli_x(), 1e-8)
        .unwrap()
        .to_generalized();
    let sequence = vec![z.clone(), x, z];

    let mut group = c.benchmark_group("trajectory_ensemble");
    group.sample_size(20);
    for &trajectories in &[1_000u64, 5_000] {
        group.bench_with_input(
            BenchmarkId::new("parallel", trajectories),
            &trajectories,
            |b, &n| {
                b.iter(|| sequential_measurement(&up, &sequence, n, 11).unwrap());
            },
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", trajectories),
            &trajectories,
            |b, &n| {
                b.iter(|| sequential_measurement_serial(&up, &sequence, n, 11).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_coexistence_grid(c: &mut Criterion) {
    // Incompatible pair: the full grid plus polish runs to the bottom.
    let a = unsharp_spin([1.0, 0.0, 0.0], 0.9).unwrap();
    let b = unsharp_spin([0.0, 0.0, 1.0], 0.9).unwrap();
    let budget = SearchBudget::default();

    let mut group = c.benchmark_group("coexistence_grid");
    group.sample_size(10);
    group.bench_function("parallel", |bench| {
        bench.iter(|| coexist_binary_povms(&a, &b, &budget).unwrap());
    });
    group.bench_function("sequential", |bench| {
        bench.iter(|| coexist_binary_povms_serial(&a, &b, &budget).unwrap());
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_born_sampling,
    bench_trajectory_ensemble,
    bench_coexistence_grid
);
criterion_main!(benches);
