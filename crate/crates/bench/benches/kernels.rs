use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kernelscope::christol::{orbit_explore, series_from_table};
use kernelscope::kernel::{kernel_profile, rank_profile};
use kernelscope::{build_factor_table, generate, generate_table, FunctionId};

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    for n in [100_000usize, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| build_factor_table(black_box(n)).unwrap()));
    }
    g.finish();
}

fn tables(c: &mut Criterion) {
    let ft = build_factor_table(1_000_000).unwrap();
    let mut g = c.benchmark_group("generate");
    for id in [FunctionId::Lambda, FunctionId::Tau, FunctionId::Phi] {
        g.bench_function(id.name().to_string(), |b| b.iter(|| generate(&id, 1_000_000, &ft).unwrap()));
    }
    g.finish();
}

fn profiles(c: &mut Criterion) {
    let lam = generate_table(&FunctionId::Lambda, 1 << 17).unwrap();
    c.bench_function("kernel_profile lambda L=8 M=256", |b| b.iter(|| kernel_profile(&lam, 2, 8, 256).unwrap()));
    let s2 = generate_table(&FunctionId::SumBinaryDigits, 1 << 14).unwrap();
    c.bench_function("rank_profile digit sum L=6 M=128", |b| b.iter(|| rank_profile(&s2, 2, 6, 128).unwrap()));
}

fn orbits(c: &mut Criterion) {
    let t = generate_table(&FunctionId::Lambda, 1 << 16).unwrap();
    let s = series_from_table(&t, 3, 1 << 16).unwrap();
    c.bench_function("orbit lambda mod 3 budget 50", |b| b.iter(|| orbit_explore(&s, 50).unwrap()));
}

criterion_group!(benches, sieve, tables, profiles, orbits);
criterion_main!(benches);
