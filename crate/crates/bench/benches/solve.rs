use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sfmlab_core::reconstruct::{solve, solve_jet, SolveOptions};
use sfmlab_core::sfm::synth::{perturb, random_jet_scene, random_scene};
use sfmlab_core::{CameraKind, Configuration};

fn round_trips(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    let opts = SolveOptions::default();
    for (kind, n, m) in [
        (CameraKind::OmniOriented2d, 3, 3),
        (CameraKind::AffineOrtho3d, 3, 3),
        (CameraKind::Omni2d, 5, 3),
        (CameraKind::Perspective3d, 7, 2),
    ] {
        let truth = random_scene(kind, n, m, 2).unwrap();
        let meas = truth.evaluate().unwrap();
        let init = perturb(&truth, 0.1, 3).unwrap();
        group.bench_function(format!("{kind}/{n}x{m}"), |b| {
            b.iter(|| solve(black_box(&meas), black_box(&init), &opts).unwrap())
        });
    }
    let truth = random_jet_scene(CameraKind::Omni2d, 7, 6, 2).unwrap();
    let meas = truth.evaluate().unwrap();
    let init = perturb(&truth, 0.1, 3).unwrap();
    group.bench_function("circle/7x6", |b| {
        b.iter(|| solve_jet(black_box(&meas), &truth.times, black_box(&init), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, round_trips);
criterion_main!(benches);
