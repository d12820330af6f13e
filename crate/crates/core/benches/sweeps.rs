use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;

use selmer_core::certify::{construct, ConstructionRequest};
use selmer_core::exec::Execution;
use selmer_core::legendre::{reduction_type, split_oracle, LegendreCurve};
use selmer_core::quadfield::{class_number_by_ideals, count_reduced_definite, scan, PrimeSet, QuadraticField};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn prime_scan(c: &mut Criterion) {
    let k = QuadraticField::new(-1).unwrap();
    let mut group = c.benchmark_group("s2_scan");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "p=11 count=200"), |b| {
            b.iter(|| scan(&k, 11, PrimeSet::S2, black_box(200), 1_000_000, exec).unwrap())
        });
    }
    group.finish();
}

fn legendre_sweep(c: &mut Criterion) {
    let lambdas: Vec<i64> = (3..=2001i64).step_by(2).flat_map(|l| [l, -l]).collect();
    let mut group = c.benchmark_group("legendre_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "|lambda| <= 2001"), |b| {
            b.iter(|| {
                exec.map(&lambdas, |&l| {
                    let lambda = BigInt::from(l);
                    let curve = LegendreCurve::new(lambda.clone()).unwrap();
                    curve
                        .bad_primes()
                        .unwrap()
                        .into_iter()
                        .filter(|&q| q != 2)
                        .all(|q| reduction_type(&lambda, q).unwrap().kind == split_oracle(&lambda, q).unwrap())
                })
            })
        });
    }
    group.finish();
}

fn class_numbers(c: &mut Criterion) {
    let fields: Vec<QuadraticField> = (-2000..=-1i64).filter_map(|d| QuadraticField::new(d).ok()).collect();
    let mut group = c.benchmark_group("class_number_table");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "-2000 <= d < 0"), |b| {
            b.iter(|| {
                exec.map(&fields, |k| {
                    count_reduced_definite(k.disc()) == class_number_by_ideals(k, 1 << 24).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construction");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut req = ConstructionRequest::new(19, -5, 6);
        req.execution = exec;
        group.bench_function(BenchmarkId::new(name, "p=19 d=-5 n=6"), |b| b.iter(|| construct(&req).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, prime_scan, legendre_sweep, class_numbers, construction);
criterion_main!(benches);
