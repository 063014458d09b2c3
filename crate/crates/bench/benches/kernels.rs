use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qaoae_bench::fixture;
use qaoae_core::entanglement::{schmidt_spectrum, spectrum_blocks};
use qaoae_core::optimize::{cost_and_gradient, gradient_fd, sample_initial_angles};
use qaoae_core::simulator::{apply_mixer, apply_phase, run_qaoa_diag};
use qaoae_core::{GraphKind, StateVector};

fn gates(c: &mut Criterion) {
    let mut group = c.benchmark_group("gates");
    for n in [12, 16, 20] {
        let problem = fixture(GraphKind::Regular3, n);
        let mut state = StateVector::plus(n).unwrap();
        group.bench_with_input(BenchmarkId::new("mixer", n), &n, |b, _| b.iter(|| apply_mixer(&mut state, 0.3)));
        group.bench_with_input(BenchmarkId::new("phase_regular3", n), &n, |b, _| {
            b.iter(|| apply_phase(&mut state, 0.7, &problem.diag).unwrap())
        });
        let complete = fixture(GraphKind::Complete, n);
        group.bench_with_input(BenchmarkId::new("phase_complete", n), &n, |b, _| {
            b.iter(|| apply_phase(&mut state, 0.7, &complete.diag).unwrap())
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(20);
    for n in [10, 14] {
        let problem = fixture(GraphKind::Complete, n);
        let angles = sample_initial_angles(8, 1).unwrap();
        let state = run_qaoa_diag(&problem.diag, &angles).unwrap();
        group.bench_with_input(BenchmarkId::new("schmidt", n), &n, |b, _| {
            b.iter(|| schmidt_spectrum(black_box(&state), &problem.part).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("blocks", n), &n, |b, _| {
            b.iter(|| spectrum_blocks(black_box(&state), &problem.part).unwrap())
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    group.sample_size(20);
    let problem = fixture(GraphKind::Regular3, 12);
    for p in [2, 4, 8] {
        let angles = sample_initial_angles(p, 3).unwrap();
        group.bench_with_input(BenchmarkId::new("adjoint", p), &p, |b, _| {
            b.iter(|| cost_and_gradient(&problem.diag, black_box(&angles)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("central_difference", p), &p, |b, _| {
            b.iter(|| gradient_fd(&problem.diag, black_box(&angles)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gates, spectra, gradients);
criterion_main!(benches);
