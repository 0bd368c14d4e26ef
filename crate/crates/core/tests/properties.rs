use proptest::prelude::*;
use rand::Rng;

use sfmlab_core::reconstruct::{default_priority, gauge_fix_ordered, solve, solve_in_gauge, SolveOptions};
use sfmlab_core::sfm::synth::{perturb, random_scene, scene_rng};
use sfmlab_core::sfm::{default_rel_tol, jacobian, numerical_rank, DEFAULT_STEP};
use sfmlab_core::symmetry::{align, random_element};
use sfmlab_core::{catalog, CameraKind, Configuration, Measurements, RetinalPoint};

fn rank_of<C: Configuration>(c: &C) -> usize {
    let j = jacobian(c, DEFAULT_STEP).unwrap();
    numerical_rank(&j, default_rel_tol(j.nrows(), j.ncols())).unwrap().rank
}

fn class_index() -> impl Strategy<Value = usize> {
    0..catalog().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn data_invariant_under_the_group(k in class_index(), seed in 0u64..10_000, g in 0u64..10_000) {
        let class = &catalog()[k];
        let scene = random_scene(class.kind, 4, 3, seed).unwrap();
        let moved = random_element(class.group, class.d, g).act(&scene).unwrap();
        let (a, b) = (scene.evaluate().unwrap().flatten(), moved.evaluate().unwrap().flatten());
        for (x, y) in a.iter().zip(&b) {
            let diff = if class.kind.angular() {
                sfmlab_core::rotation::wrap_angle(x - y).abs()
            } else {
                (x - y).abs()
            };
            prop_assert!(diff < 1e-9, "{}: {x} vs {y}", class.name);
        }
    }

    #[test]
    fn camera_map_is_idempotent(k in class_index(), seed in 0u64..10_000) {
        let class = &catalog()[k];
        let scene = random_scene(class.kind, 3, 2, seed).unwrap();
        for cam in &scene.cameras {
            for p in &scene.points {
                let q = cam.camera_map(&scene.globals, p).unwrap();
                let qq = cam.camera_map(&scene.globals, &q).unwrap();
                prop_assert!((qq - &q).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_unchanged_by_the_group(k in class_index(), seed in 0u64..1000) {
        let class = &catalog()[k];
        let scene = random_scene(class.kind, 5, 3, seed).unwrap();
        let moved = random_element(class.group, class.d, seed + 1).act(&scene).unwrap();
        prop_assert_eq!(rank_of(&scene), rank_of(&moved));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn accepted_steps_never_raise_the_cost(seed in 0u64..1000, noise in 0.0f64..1e-2) {
        let truth = random_scene(CameraKind::Omni2d, 5, 3, seed).unwrap();
        let meas = noisy(&truth.evaluate().unwrap(), noise, seed);
        let init = perturb(&truth, 0.1, seed + 17).unwrap();
        let rep = solve(&meas, &init, &SolveOptions::default()).unwrap();
        prop_assert!(rep.cost_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(!rep.converged || rep.rmse <= 1e-6);
    }
}

fn noisy(meas: &Measurements, sigma: f64, seed: u64) -> Measurements {
    let mut rng = scene_rng(seed ^ 0xA5A5);
    let data = meas
        .data
        .iter()
        .map(|r| RetinalPoint::new(r.coords.iter().map(|v| v + sigma * rng.random_range(-1.0..=1.0)).collect()))
        .collect();
    Measurements::new(meas.n, meas.m, meas.s, data).unwrap()
}

#[test]
fn two_gauges_give_the_same_reconstruction() {
    for (kind, n, m) in [
        (CameraKind::AffineOrtho3d, 3, 3),
        (CameraKind::OmniOriented2d, 3, 3),
        (CameraKind::Omni2d, 5, 3),
    ] {
        let truth = random_scene(kind, n, m, 11).unwrap();
        let meas = truth.evaluate().unwrap();
        let init = perturb(&truth, 0.05, 12).unwrap();
        let forward = default_priority(&init);
        let mut backward = forward.clone();
        backward.reverse();
        let g1 = gauge_fix_ordered(&init, &forward).unwrap();
        let g2 = gauge_fix_ordered(&init, &backward).unwrap();
        assert_ne!(g1.pinned, g2.pinned);
        let opts = SolveOptions::default();
        let a = solve_in_gauge(&meas, &init, g1, &opts).unwrap();
        let b = solve_in_gauge(&meas, &init, g2, &opts).unwrap();
        assert!(a.converged && b.converged, "{kind}");
        let (_, err) = align(&a.scene, &b.scene).unwrap();
        assert!(err < 1e-6, "{kind}: gauges disagree by {err}");
    }
}

#[test]
fn reconstruction_error_grows_linearly_with_noise() {
    let opts = SolveOptions::default();
    let mean_error = |sigma: f64| -> f64 {
        let errs: Vec<f64> = (0..6)
            .map(|seed| {
                let truth = random_scene(CameraKind::AffineOrtho3d, 3, 3, seed).unwrap();
                let meas = noisy(&truth.evaluate().unwrap(), sigma, seed);
                let rep = solve(&meas, &truth, &opts).unwrap();
                align(&rep.scene, &truth).unwrap().1
            })
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    let (small, large) = (mean_error(1e-4), mean_error(1e-3));
    let ratio = large / small;
    // linear scaling gives 10; allow a factor 10 either way
    assert!((1.0..=100.0).contains(&ratio), "errors {small:e} and {large:e}");
}
