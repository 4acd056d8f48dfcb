use std::hint::black_box;

use blowup_core::{
    ball_blowup, blowup_halflength, build_domain, make_orbit, solve_blowup, solve_dirichlet, BlowupConfig, OrbitSpec,
    PartitionSpec, Potential, RadialConfig, ShapeSpec, Sign,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn disk(h: f64) -> blowup_core::GridDomain {
    build_domain(ShapeSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, h, PartitionSpec::AllPlus).unwrap()
}

fn ode(c: &mut Criterion) {
    let quartic = Potential::power(4.0).unwrap();
    let cosh = Potential::cosh();
    c.bench_function("halflength quartic", |b| b.iter(|| blowup_halflength(&quartic, black_box(1.0), 1e-12)));
    c.bench_function("halflength cosh", |b| b.iter(|| blowup_halflength(&cosh, black_box(1.0), 1e-12)));
    let orbit = make_orbit(&quartic, OrbitSpec::Alpha { lambda: 1.0 }, 1e-12).unwrap();
    c.bench_function("alpha orbit eval", |b| b.iter(|| orbit.eval(black_box(0.3))));
}

fn radial(c: &mut Criterion) {
    let p = Potential::power(4.0).unwrap();
    let cfg = RadialConfig::default();
    c.bench_function("ball blowup 2d", |b| b.iter(|| ball_blowup(&p, 2, black_box(1.0), &cfg)));
}

fn grid(c: &mut Criterion) {
    let p = Potential::power(4.0).unwrap();
    c.bench_function("build disk h=0.05", |b| b.iter(|| disk(black_box(0.05))));
    let dom = disk(0.1);
    let g = vec![2.0; dom.len()];
    c.bench_function("dirichlet disk h=0.1", |b| b.iter(|| solve_dirichlet(&p, &dom, black_box(&g), 1e-10)));
    let mut group = c.benchmark_group("blowup");
    group.sample_size(10);
    group.bench_function("disk h=0.1", |b| b.iter(|| solve_blowup(&p, &dom, Sign::Plus, &BlowupConfig::default())));
    group.finish();
}

criterion_group!(benches, ode, radial, grid);
criterion_main!(benches);
