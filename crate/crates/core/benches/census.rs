use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flatlift::census::{enumerate_classes_with, Census, Execution};
use flatlift::gen::{random_ind_flat_poset, random_ring, random_stable_prediagram, rng};
use flatlift::lifting::lift_diagram;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel(None))]
}

fn census(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    g.sample_size(10);
    for n in [5, 6] {
        for (name, exec) in modes() {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| Census::run(black_box(n), exec).unwrap())
            });
        }
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::new(name, 6), |b| b.iter(|| enumerate_classes_with(black_box(6), exec).unwrap()));
    }
    g.finish();
}

fn lifting(c: &mut Criterion) {
    let mut r = rng(3);
    let inputs: Vec<_> = (0..20)
        .map(|_| {
            let shape = random_ind_flat_poset(&mut r, 6);
            let ring = random_ring(&mut r, &[2, 3], &[2, 3]);
            random_stable_prediagram(&mut r, &shape, ring, 3)
        })
        .collect();
    c.bench_function("lift_diagram/20", |b| {
        b.iter(|| inputs.iter().map(|x| lift_diagram(x).unwrap().added_free_rank()).sum::<usize>())
    });
}

criterion_group!(benches, census, enumeration, lifting);
criterion_main!(benches);
