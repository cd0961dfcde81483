use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use dobrushin::{decompose, extract_interface, reconstruct, standard_rep, FloorConstraint};
use dobrushin_bench::{sample_interface, warm_chain};

fn metropolis(c: &mut Criterion) {
    let mut g = c.benchmark_group("metropolis_1000_steps");
    for (name, constraint) in [
        ("unconditioned", FloorConstraint::None),
        ("floor", FloorConstraint::InterfaceConditioned(0)),
        ("plus_below", FloorConstraint::PlusBelow(0)),
    ] {
        let mut chain = warm_chain(16, 10, 0.9, constraint);
        g.bench_function(name, |b| b.iter(|| chain.run(black_box(1000))));
    }
    g.finish();
}

fn interface_kernels(c: &mut Criterion) {
    let chain = warm_chain(16, 10, 0.8, FloorConstraint::None);
    let config = chain.config();
    c.bench_function("extract_interface_16", |b| b.iter(|| extract_interface(black_box(&config))));

    let iface = sample_interface();
    c.bench_function("decompose_16", |b| b.iter(|| decompose(black_box(&iface))));
    let rep = standard_rep(&iface);
    c.bench_function("reconstruct_16", |b| {
        b.iter_batched(|| rep.clone(), |r| reconstruct(&r).expect("admissible"), BatchSize::SmallInput)
    });
}

criterion_group!(benches, metropolis, interface_kernels);
criterion_main!(benches);
