use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sfmlab_core::sfm::synth::random_scene;
use sfmlab_core::sfm::{default_rel_tol, jacobian, numerical_rank, DEFAULT_STEP};
use sfmlab_core::CameraKind;

fn jacobian_and_rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobian_rank");
    for (kind, n, m) in [
        (CameraKind::AffineOrtho3d, 3, 3),
        (CameraKind::Perspective3d, 7, 2),
        (CameraKind::Omni3d, 10, 5),
        (CameraKind::Line3d, 6, 4),
    ] {
        let scene = random_scene(kind, n, m, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("jacobian", format!("{kind}/{n}x{m}")), &scene, |b, s| {
            b.iter(|| jacobian(black_box(s), DEFAULT_STEP).unwrap())
        });
        let jac = jacobian(&scene, DEFAULT_STEP).unwrap();
        let tol = default_rel_tol(jac.nrows(), jac.ncols());
        group.bench_with_input(BenchmarkId::new("svd_rank", format!("{kind}/{n}x{m}")), &jac, |b, j| {
            b.iter(|| numerical_rank(black_box(j), tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, jacobian_and_rank);
criterion_main!(benches);
