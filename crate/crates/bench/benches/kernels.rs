use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphcov::experiments::generate_synthetic;
use graphcov::experiments::SyntheticKind;
use graphcov::inference::{GaussianSampler, Sampler};
use graphcov::rng::stream_rng;
use graphcov::{build_sigma, delta_m, laplacian, pinv_power, McmcConfig, MaternSpec, ModelState, PriorSpec};
use graphcov_bench::lattice_weights;

const SIDES: [usize; 3] = [5, 10, 15];

fn pinv(c: &mut Criterion) {
    let mut g = c.benchmark_group("pinv_power");
    for side in SIDES {
        let l = laplacian(&lattice_weights(side, 1));
        g.bench_with_input(BenchmarkId::from_parameter(side * side), &l, |b, l| b.iter(|| pinv_power(black_box(l), 2.0)));
    }
    g.finish();
}

fn metric(c: &mut Criterion) {
    let mut g = c.benchmark_group("delta_m");
    for side in SIDES {
        let w = lattice_weights(side, 2);
        g.bench_with_input(BenchmarkId::from_parameter(side * side), &w, |b, w| b.iter(|| delta_m(black_box(w), 2.0)));
    }
    g.finish();
}

fn sigma(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_sigma");
    let spec = MaternSpec::new(1.5, 1.0).unwrap();
    for side in SIDES {
        let w = lattice_weights(side, 3);
        g.bench_with_input(BenchmarkId::from_parameter(side * side), &w, |b, w| {
            b.iter(|| build_sigma(black_box(w), &spec, 0.1))
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("mh_sweep");
    g.sample_size(10);
    for side in [5, 10] {
        let w = lattice_weights(side, 4);
        let graph = w.graph().clone();
        let truth = ModelState {
            sigma2: 0.8,
            psi: 0.2,
            weights: w.values().to_vec(),
            beta0: Vec::new(),
            beta: Vec::new(),
            sigma2_0: None,
            sigma2_beta: None,
            theta: None,
        };
        let data = generate_synthetic(&graph, &truth, 1.5, 50, &SyntheticKind::Gaussian, &mut stream_rng(4, 1)).unwrap();
        let config = McmcConfig { estimate_nugget: true, iterations: usize::MAX, ..McmcConfig::default() };
        let mut sampler = GaussianSampler::new(&data.y, graph, PriorSpec::default(), config).unwrap();
        g.bench_function(BenchmarkId::from_parameter(side * side), |b| b.iter(|| sampler.sweep().unwrap()));
    }
    g.finish();
}

criterion_group!(benches, pinv, metric, sigma, sweep);
criterion_main!(benches);
