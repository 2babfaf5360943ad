use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use eigencert::ansatz;
use eigencert::cost::{f_h, f_q};
use eigencert::optimizer::{minimize, BfgsConfig};
use eigencert::simulator::{evolve_exact, evolve_trotter};
use eigencert::spectral::diagonalize;
use eigencert::{CostFunction, CostMode, CostSpec, Evolution, ShotPlan};
use eigencert_bench::Fixture;

fn circuits(c: &mut Criterion) {
    let mut g = c.benchmark_group("ansatz_prepare");
    for n in [4, 6, 8, 10] {
        let fx = Fixture::new(n, 3);
        let circuit = ansatz::build(&fx.ansatz).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| circuit.run(black_box(&fx.params)).unwrap()));
    }
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let fx = Fixture::new(5, 4);
    let psi = fx.state();
    c.bench_function("evolve_exact_n5", |b| b.iter(|| evolve_exact(black_box(&psi), &fx.hamiltonian, 1.0).unwrap()));
    let mut g = c.benchmark_group("evolve_trotter_n5");
    for r in [1, 8, 64] {
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            b.iter(|| evolve_trotter(black_box(&psi), &fx.model, -1.0, r).unwrap())
        });
    }
    g.finish();
}

fn costs(c: &mut Criterion) {
    let fx = Fixture::new(5, 4);
    let psi = fx.state();
    let h = &fx.hamiltonian;
    c.bench_function("f_h_exact_n5", |b| b.iter(|| f_h(black_box(&psi), h, &CostMode::Exact).unwrap()));
    c.bench_function("f_q_exact_n5", |b| b.iter(|| f_q(black_box(&psi), h, 1.0, &CostMode::Exact).unwrap()));
    let plan = ShotPlan::new(1000, 1).unwrap();
    let sampled = CostMode::Sampled { plan, evolution: Evolution::Exact };
    c.bench_function("f_h_sampled_n5_m1000", |b| b.iter(|| f_h(black_box(&psi), h, &sampled).unwrap()));
    c.bench_function("f_q_sampled_n5_m1000", |b| b.iter(|| f_q(black_box(&psi), h, 1.0, &sampled).unwrap()));
    c.bench_function("diagonalize_n6", |b| {
        let big = Fixture::new(6, 1).hamiltonian;
        b.iter(|| diagonalize(black_box(&big)).unwrap())
    });
}

fn optimization(c: &mut Criterion) {
    let fx = Fixture::new(4, 3);
    let cf = CostFunction::new(CostSpec::variance(fx.hamiltonian.clone()), fx.ansatz).unwrap();
    c.bench_function("gradient_n4_l3", |b| b.iter(|| cf.gradient(black_box(&fx.params)).unwrap()));
    let mut g = c.benchmark_group("bfgs_n4_l3");
    g.sample_size(10);
    g.bench_function("variance", |b| b.iter(|| minimize(&cf, black_box(&fx.params), &BfgsConfig::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, circuits, evolution, costs, optimization);
criterion_main!(benches);
