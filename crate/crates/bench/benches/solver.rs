use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nvconf::channel::{nu_ou, xi_cpmg};
use nvconf::discrim::{povm_oracle, ORACLE_MIN_DENSITY};
use nvconf::{dilate, decompose_two_level, helstrom, mc_solve};
use nvconf_bench::{pairs, PULSES};

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc_solve");
    for (name, pair) in pairs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &pair, |b, p| b.iter(|| mc_solve(black_box(p)).unwrap()));
    }
    g.finish();
    let (_, pair) = &pairs()[0];
    c.bench_function("helstrom", |b| b.iter(|| helstrom(black_box(pair)).unwrap()));
}

fn neumark(c: &mut Criterion) {
    let (_, pair) = &pairs()[0];
    let povm = mc_solve(pair).unwrap().povm;
    c.bench_function("dilate", |b| b.iter(|| dilate(black_box(&povm)).unwrap()));
    let u = dilate(&povm).unwrap().u;
    c.bench_function("decompose_two_level", |b| b.iter(|| decompose_two_level(black_box(&u)).unwrap()));
}

fn filter(c: &mut Criterion) {
    let mut g = c.benchmark_group("nu_ou_cpmg");
    for n in PULSES {
        let xi = xi_cpmg(n, 0.5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &xi, |b, xi| b.iter(|| nu_ou(3.6, 25.0, black_box(xi)).unwrap()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let (_, pair) = &pairs()[0];
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("min_density", |b| b.iter(|| povm_oracle(black_box(pair), ORACLE_MIN_DENSITY).unwrap()));
    g.finish();
}

criterion_group!(benches, solver, neumark, filter, oracle);
criterion_main!(benches);
