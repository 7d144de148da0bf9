use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use fraclap_core::domain::{generate_interval, generate_square};
use fraclap_core::forms::{assemble, default_tol};
use fraclap_core::quadrature::{KernelSpec, KernelWeight};
use fraclap_core::specfun::{DimensionTag, FractionalOrder};

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);

    let mesh_1d = generate_interval(64, 0.0, 1.0).unwrap();
    let s = FractionalOrder::new(0.5).unwrap();
    for weight in [KernelWeight::Plain, KernelWeight::Log] {
        let kernel = KernelSpec::new(DimensionTag::new(1).unwrap(), s, weight);
        group.bench_function(format!("interval64_{weight}"), |b| {
            b.iter(|| assemble(black_box(&mesh_1d), &kernel, default_tol(1)).unwrap())
        });
    }

    let mesh_2d = generate_square(4).unwrap();
    let kernel = KernelSpec::new(DimensionTag::new(2).unwrap(), s, KernelWeight::Plain);
    group.bench_function("square4_plain", |b| {
        b.iter(|| assemble(black_box(&mesh_2d), &kernel, default_tol(2)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_assembly);
criterion_main!(benches);
