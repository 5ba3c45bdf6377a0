use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use fch_bench::{params, state};
use fch_core::stepper::{step_imex, step_implicit};
use fch_core::{Boundary, Model, MuFormulation, SolverConfig};

fn mu_and_energy(c: &mut Criterion) {
    let p = params();
    let model = Model::exact(p);
    let mut g = c.benchmark_group("mu");
    for (dim, n) in [(1, 512), (2, 128)] {
        let (_, u) = state(dim, n, Boundary::NeumannCosine);
        for form in [MuFormulation::DivergenceForm, MuFormulation::Expanded] {
            g.bench_with_input(BenchmarkId::new(format!("{form:?}"), format!("{dim}d_{n}")), &u, |b, u| {
                b.iter(|| model.mu(black_box(u), form).unwrap())
            });
        }
        g.bench_with_input(BenchmarkId::new("energy", format!("{dim}d_{n}")), &u, |b, u| {
            b.iter(|| model.energy(black_box(u)).unwrap())
        });
    }
    g.finish();
}

fn steps(c: &mut Criterion) {
    let p = params();
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("step");
    for (dim, n, bc) in [(1, 512, Boundary::NeumannCosine), (2, 128, Boundary::PeriodicFourier)] {
        let (_, u) = state(dim, n, bc);
        g.bench_with_input(BenchmarkId::new("imex", format!("{dim}d_{n}")), &u, |b, u| {
            b.iter(|| step_imex(black_box(u), 1e-3, &p, &cfg).unwrap())
        });
    }
    g.sample_size(10);
    let (_, u) = state(1, 256, Boundary::NeumannCosine);
    g.bench_function("newton/1d_256", |b| b.iter(|| step_implicit(black_box(&u), 1e-2, &p, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, mu_and_energy, steps);
criterion_main!(benches);
