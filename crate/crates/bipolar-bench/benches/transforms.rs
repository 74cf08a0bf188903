use criterion::{black_box, criterion_group, criterion_main, Criterion};

use bipolar_bench::{benchmark_grid, benchmark_packet, MASS};
use bipolar_core::oracle::{unipolar_propagate, OracleOptions};
use bipolar_core::potential::PotentialModel;
use bipolar_core::spectrum::{inverse_spectrum, momentum_spectrum};

fn bench_spectrum(c: &mut Criterion) {
    let grid = benchmark_grid();
    let packet = benchmark_packet(&grid);
    c.bench_function("momentum_spectrum 876 nodes", |b| {
        b.iter(|| momentum_spectrum(black_box(&packet)))
    });
    let spectrum = momentum_spectrum(&packet);
    c.bench_function("inverse_spectrum 876 nodes", |b| {
        b.iter(|| inverse_spectrum(black_box(&spectrum)))
    });
}

fn bench_quadrature(c: &mut Criterion) {
    let grid = benchmark_grid();
    let packet = benchmark_packet(&grid);
    c.bench_function("cumulative_integral 876 nodes", |b| {
        b.iter(|| black_box(&packet).cumulative_integral())
    });
    c.bench_function("second_derivative 876 nodes", |b| {
        b.iter(|| black_box(&packet).second_derivative())
    });
}

fn bench_oracle(c: &mut Criterion) {
    let grid = benchmark_grid();
    let packet = benchmark_packet(&grid);
    let model = PotentialModel::eckart(0.0024, 2.5).unwrap();
    c.bench_function("oracle split-step 1000 steps", |b| {
        b.iter(|| {
            let opts = OracleOptions::new(0.1, 100.0, vec![100.0]);
            unipolar_propagate(&[packet.clone()], &model, MASS, &opts).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_spectrum, bench_quadrature, bench_oracle
}
criterion_main!(benches);
