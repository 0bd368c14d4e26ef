//! Seeded synthetic scenes for rank experiments and reconstruction round trips.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Configuration, JetScene, MotionModel, Scene};
use crate::camera::{random_camera_with, random_globals, uniform_rotation, Camera, CameraKind, Family};
use crate::error::{Error, Result};
use crate::rotation;

/// Closest approach allowed between a point and an omni camera center.
const MIN_CENTER_DISTANCE: f64 = 0.3;
/// Elevation margin kept away from the sphere chart poles.
const POLE_MARGIN: f64 = 1e-3;
const MAX_ATTEMPTS: usize = 100;

pub fn scene_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_point<R: Rng>(rng: &mut R, d: usize, half: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(-half..=half))
}

/// Orientation whose optical axis (last camera axis) points from `center`
/// to the origin, with a random roll.
fn look_at_origin<R: Rng>(rng: &mut R, center: &DVector<f64>) -> Vec<f64> {
    let d = center.len();
    let z = -center.normalize();
    let mut r = DMatrix::zeros(d, d);
    if d == 2 {
        r.set_column(0, &DVector::from_column_slice(&[z[1], -z[0]]));
        r.set_column(1, &z);
    } else {
        let z3 = nalgebra::Vector3::new(z[0], z[1], z[2]);
        let roll = rng.random_range(-PI..PI);
        let helper = nalgebra::Vector3::new(roll.cos(), roll.sin(), 0.7);
        let x = helper.cross(&z3).normalize();
        let y = z3.cross(&x);
        for k in 0..3 {
            r[(k, 0)] = x[k];
            r[(k, 1)] = y[k];
            r[(k, 2)] = z3[k];
        }
    }
    rotation::log(&r)
}

fn scene_camera<R: Rng>(kind: CameraKind, rng: &mut R) -> Camera {
    let d = kind.class().d;
    match kind.family() {
        Family::AffineOrtho => random_camera_with(kind, rng, 1.0),
        Family::Line => loop {
            let cam = random_camera_with(kind, rng, 1.0);
            if cam.params[0].sin() > 0.05 {
                break cam;
            }
        },
        Family::OmniOriented => Camera {
            kind,
            params: uniform_point(rng, d, 2.5).as_slice().to_vec(),
        },
        Family::Omni => {
            let mut params = uniform_point(rng, d, 2.5).as_slice().to_vec();
            params.extend(uniform_rotation(rng, d));
            Camera { kind, params }
        }
        Family::Perspective | Family::PerspectiveKnown | Family::PerspectiveZoom => {
            let dir = loop {
                let v = uniform_point(rng, d, 1.0);
                if v.norm() > 0.2 && v.norm() <= 1.0 {
                    break v.normalize();
                }
            };
            let center = dir * rng.random_range(3.5..=5.0);
            let mut params = center.as_slice().to_vec();
            params.extend(look_at_origin(rng, &center));
            if kind.family() == Family::PerspectiveZoom {
                params.push(rng.random_range(0.5..=2.0));
            }
            Camera { kind, params }
        }
    }
}

/// Whether every observation is comfortably away from camera singularities.
fn well_posed<C: Configuration>(config: &C) -> bool {
    let Ok(meas) = config.evaluate() else {
        return false;
    };
    let kind = config.kind();
    if kind.angular() {
        for i in 0..config.n_points() {
            for (j, cam) in config.cameras().iter().enumerate() {
                let p = config.observed_point(i, j);
                if (p - cam.center().unwrap()).norm() < MIN_CENTER_DISTANCE {
                    return false;
                }
            }
        }
        if kind.class().d == 3
            && meas.data.iter().any(|r| r.coords[1].abs() > PI / 2.0 - POLE_MARGIN)
        {
            return false;
        }
    }
    true
}

/// Generic random scene: points uniform in `[-1, 1]^d`, cameras drawn per
/// family (perspective cameras on a shell looking at the point cloud, omni
/// centers in `[-2.5, 2.5]^d` away from every point).
pub fn random_scene(kind: CameraKind, n: usize, m: usize, seed: u64) -> Result<Scene> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be at least 1".into()));
    }
    let mut rng = scene_rng(seed);
    let d = kind.class().d;
    for _ in 0..MAX_ATTEMPTS {
        let points = (0..n).map(|_| uniform_point(&mut rng, d, 1.0)).collect();
        let cameras = (0..m).map(|_| scene_camera(kind, &mut rng)).collect();
        let globals = random_globals(kind, &mut rng, 1.0);
        let scene = Scene { kind, points, cameras, globals };
        if well_posed(&scene) {
            return Ok(scene);
        }
    }
    Err(Error::Singular(format!("no regular {kind} scene after {MAX_ATTEMPTS} draws")))
}

/// Observation times used by [`random_jet_scene`].
pub fn default_times(m: usize) -> Vec<f64> {
    (0..m).map(|j| 0.5 * j as f64).collect()
}

/// Random planar scene of points moving on circles with unit angular velocity.
pub fn random_jet_scene(kind: CameraKind, n: usize, m: usize, seed: u64) -> Result<JetScene> {
    if kind.class().d != 2 {
        return Err(Error::InvalidArgument("circle scenes are planar".into()));
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be at least 1".into()));
    }
    let mut rng = scene_rng(seed);
    for _ in 0..MAX_ATTEMPTS {
        let motion = (0..n)
            .map(|_| {
                let center = uniform_point(&mut rng, 2, 1.0);
                let angle: f64 = rng.random_range(-PI..PI);
                let len = rng.random_range(0.3..=0.8);
                vec![center, DVector::from_column_slice(&[len * angle.cos(), len * angle.sin()])]
            })
            .collect();
        let cameras = (0..m).map(|_| scene_camera(kind, &mut rng)).collect();
        let globals = random_globals(kind, &mut rng, 1.0);
        let js = JetScene {
            kind,
            model: MotionModel::Circle { omega: 1.0 },
            motion,
            times: default_times(m),
            cameras,
            globals,
        };
        if well_posed(&js) {
            return Ok(js);
        }
    }
    Err(Error::Singular(format!("no regular {kind} circle scene after {MAX_ATTEMPTS} draws")))
}

/// Orthographic 3D scene whose points lie in the plane `z = 0`, viewed
/// fronto-parallel: every viewing axis is the plane normal, so the
/// camera-frame data of all points shares one depth.
pub fn coplanar_ortho_scene(n: usize, m: usize, seed: u64) -> Result<Scene> {
    let kind = CameraKind::AffineOrtho3d;
    let mut rng = scene_rng(seed);
    let points = (0..n)
        .map(|_| DVector::from_column_slice(&[rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), 0.0]))
        .collect();
    let cameras = (0..m)
        .map(|_| {
            let a: f64 = rng.random_range(-PI..PI);
            let (s, c) = a.sin_cos();
            let r = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
            let mut params = rotation::log(&r);
            params.push(rng.random_range(-1.0..=1.0));
            params.push(rng.random_range(-1.0..=1.0));
            Camera { kind, params }
        })
        .collect();
    Scene::new(kind, points, cameras, vec![])
}

/// Perturbs every coordinate by a uniform relative amount
/// `x -> x + rel * max(|x|, 0.1) * u`, `u` uniform in `[-1, 1]`.
pub fn perturb<C: Configuration>(config: &C, rel: f64, seed: u64) -> Result<C> {
    let mut rng = scene_rng(seed);
    let x = config.coords();
    let y = x.map(|v| v + rel * v.abs().max(0.1) * rng.random_range(-1.0..=1.0));
    config.with_coords(&y)
}
