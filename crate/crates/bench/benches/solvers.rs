use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wavemap_core::cauchy::{self, CauchyData, GridSpec, Rect};
use wavemap_core::eds::{flag_report, NamedFrame, RANK_TOL};
use wavemap_core::ode::OdeOptions;
use wavemap_core::simulator::{figure_scenario, Scenario, SimOptions};
use wavemap_core::weierstrass::{residual_gate, WeierstrassQuad};

fn cauchy_solve(c: &mut Criterion) {
    let data = CauchyData::example41();
    let rect = Rect {
        x: [0.0, 1.0],
        y: [0.0, 1.0],
    };
    let opts = OdeOptions::default();
    c.bench_function("cauchy_solve_example41_21x21", |b| {
        b.iter(|| cauchy::solve(black_box(&data), rect, GridSpec { nx: 21, ny: 21 }, &opts).unwrap())
    });
}

fn goursat(c: &mut Criterion) {
    let frame = NamedFrame::h1_hat();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let probes: Vec<Vec<f64>> = (0..3).map(|_| frame.random_probe(&mut rng)).collect();
    c.bench_function("goursat_flag_h1hat", |b| {
        b.iter(|| flag_report("H1hat", &frame.fields, black_box(&probes), RANK_TOL).unwrap())
    });
}

fn weierstrass(c: &mut Criterion) {
    let quad = WeierstrassQuad::random_monotone(&mut ChaCha8Rng::seed_from_u64(2));
    c.bench_function("weierstrass_gate_10x10", |b| {
        b.iter(|| residual_gate(black_box(&quad), [1.0, 2.0], [1.0, 2.0], 10).unwrap())
    });
}

fn simulate(c: &mut Criterion) {
    let opts = SimOptions::new(0.01, 0.9);
    c.bench_function("leapfrog_euclidean_figure_T1", |b| {
        b.iter(|| figure_scenario(Scenario::Euclidean, black_box(1.0), &opts).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = cauchy_solve, goursat, weierstrass, simulate
}
criterion_main!(benches);
