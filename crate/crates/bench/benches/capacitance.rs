//! Boundary-element capacitance cost per refinement level.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use refrac_core::design::{capacitance_mesh, icosphere};

fn capacitance(c: &mut Criterion) {
    let mut group = c.benchmark_group("capacitance_mesh");
    group.sample_size(10);
    for level in [2usize, 3] {
        let mesh = icosphere(1.0, level).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(mesh.num_triangles()),
            &mesh,
            |b, mesh| b.iter(|| capacitance_mesh(black_box(mesh))),
        );
    }
    group.finish();
}

criterion_group!(benches, capacitance);
criterion_main!(benches);
