//! The structure-from-motion map `F: N^n x M^m -> S^{nm}` and its
//! numerical analysis.

mod jacobian;
mod jet;
mod rank;
pub mod synth;

use nalgebra::DVector;

pub use jacobian::{jacobian, jacobian_columns, residuals, DEFAULT_STEP};
pub use jet::{circle_drift, jet_position, JetScene, MotionModel};
pub use rank::{
    default_rel_tol, generic_rank, generic_rank_tol, kernel_check, kernel_check_directions,
    numerical_rank, predicted_rank,
    GenericRank, KernelReport, RankReport,
};

use crate::camera::{Camera, CameraKind, RetinalPoint};
use crate::error::{Error, Result};
use crate::symmetry::{GroupElement, Infinitesimal};

/// Image data: an `n x m` grid of retinal points, row-major in `(point, camera)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub data: Vec<RetinalPoint>,
}

impl Measurements {
    pub fn new(n: usize, m: usize, s: usize, data: Vec<RetinalPoint>) -> Result<Self> {
        if data.len() != n * m || data.iter().any(|r| r.coords.len() != s) {
            return Err(Error::Shape(format!(
                "measurement grid does not match {n} x {m} x {s}"
            )));
        }
        Ok(Self { n, m, s, data })
    }

    pub fn get(&self, point: usize, camera: usize) -> &RetinalPoint {
        &self.data[point * self.m + camera]
    }

    /// Row-major `(point, camera, coordinate)` flattening, length `s n m`.
    pub fn flatten(&self) -> Vec<f64> {
        self.data.iter().flat_map(|r| r.coords.iter().copied()).collect()
    }
}

/// Static scene: `n` points, `m` cameras of one class and the class globals.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub kind: CameraKind,
    pub points: Vec<DVector<f64>>,
    pub cameras: Vec<Camera>,
    pub globals: Vec<f64>,
}

impl Scene {
    pub fn new(
        kind: CameraKind,
        points: Vec<DVector<f64>>,
        cameras: Vec<Camera>,
        globals: Vec<f64>,
    ) -> Result<Self> {
        let scene = Self { kind, points, cameras, globals };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let class = self.kind.class();
        if self.points.is_empty() || self.cameras.is_empty() {
            return Err(Error::Shape("a scene needs at least one point and one camera".into()));
        }
        if let Some(p) = self.points.iter().find(|p| p.len() != class.d) {
            return Err(Error::Shape(format!("point of length {} in a {}D scene", p.len(), class.d)));
        }
        validate_rig(self.kind, &self.cameras, &self.globals)
    }
}

pub(crate) fn validate_rig(kind: CameraKind, cameras: &[Camera], globals: &[f64]) -> Result<()> {
    let class = kind.class();
    for cam in cameras {
        if cam.kind != kind {
            return Err(Error::Shape(format!(
                "camera of class {} in a {} scene",
                cam.kind, class.name
            )));
        }
        cam.validate()?;
    }
    if globals.len() != class.h {
        return Err(Error::Shape(format!(
            "{} expects {} globals, got {}",
            class.name,
            class.h,
            globals.len()
        )));
    }
    if class.h > 0 && globals[0] == 0.0 {
        return Err(Error::InvalidArgument("zero focal length".into()));
    }
    Ok(())
}

/// Common surface of static and moving-point scenes: a flat coordinate
/// vector ordered points, then cameras, then globals.
pub trait Configuration: Clone + Send + Sync {
    fn kind(&self) -> CameraKind;
    fn n_points(&self) -> usize;
    fn cameras(&self) -> &[Camera];
    fn cameras_mut(&mut self) -> &mut [Camera];
    fn globals(&self) -> &[f64];
    fn globals_mut(&mut self) -> &mut Vec<f64>;

    /// Configuration coordinates per point.
    fn point_dim(&self) -> usize;
    fn point_coords(&self, i: usize) -> Vec<f64>;
    fn set_point_coords(&mut self, i: usize, x: &[f64]);

    /// Position of point `i` as seen by camera `j`.
    fn observed_point(&self, i: usize, j: usize) -> DVector<f64>;

    /// Tangent of point `i`'s coordinates under an infinitesimal group element.
    fn point_tangent(&self, i: usize, xi: &Infinitesimal) -> Vec<f64>;

    /// Applies a group element to the point-configuration block only.
    fn act_points(&self, gamma: &GroupElement) -> Self;

    /// Ambient positions that transform as points: used for alignment.
    fn anchors(&self) -> Vec<DVector<f64>>;

    fn n_cameras(&self) -> usize {
        self.cameras().len()
    }

    /// Length of the full coordinate vector.
    fn dim(&self) -> usize {
        let class = self.kind().class();
        self.point_dim() * self.n_points() + class.f * self.n_cameras() + class.h
    }

    fn coords(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.n_points() {
            out.extend(self.point_coords(i));
        }
        for cam in self.cameras() {
            out.extend_from_slice(&cam.params);
        }
        out.extend_from_slice(self.globals());
        DVector::from_vec(out)
    }

    fn with_coords(&self, x: &DVector<f64>) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "coordinate vector of length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let mut out = self.clone();
        let pd = self.point_dim();
        let x = x.as_slice();
        for i in 0..self.n_points() {
            out.set_point_coords(i, &x[i * pd..(i + 1) * pd]);
        }
        let mut off = pd * self.n_points();
        let f = self.kind().class().f;
        for cam in out.cameras_mut() {
            cam.params.copy_from_slice(&x[off..off + f]);
            off += f;
        }
        out.globals_mut().copy_from_slice(&x[off..]);
        Ok(out)
    }

    fn evaluate(&self) -> Result<Measurements> {
        let class = self.kind().class();
        let (n, m) = (self.n_points(), self.n_cameras());
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            for (j, cam) in self.cameras().iter().enumerate() {
                let p = self.observed_point(i, j);
                let r = cam.project(self.globals(), &p).map_err(|e| match e {
                    Error::Singular(reason) => Error::SingularAt { point: i, camera: j, reason },
                    other => other,
                })?;
                data.push(r);
            }
        }
        Ok(Measurements { n, m, s: class.s, data })
    }
}

impl Configuration for Scene {
    fn kind(&self) -> CameraKind {
        self.kind
    }

    fn n_points(&self) -> usize {
        self.points.len()
    }

    fn cameras(&self) -> &[Camera] {
        &self.cameras
    }

    fn cameras_mut(&mut self) -> &mut [Camera] {
        &mut self.cameras
    }

    fn globals(&self) -> &[f64] {
        &self.globals
    }

    fn globals_mut(&mut self) -> &mut Vec<f64> {
        &mut self.globals
    }

    fn point_dim(&self) -> usize {
        self.kind.class().d
    }

    fn point_coords(&self, i: usize) -> Vec<f64> {
        self.points[i].as_slice().to_vec()
    }

    fn set_point_coords(&mut self, i: usize, x: &[f64]) {
        self.points[i].copy_from_slice(x);
    }

    fn observed_point(&self, i: usize, _j: usize) -> DVector<f64> {
        self.points[i].clone()
    }

    fn point_tangent(&self, i: usize, xi: &Infinitesimal) -> Vec<f64> {
        xi.point_rate(&self.points[i]).as_slice().to_vec()
    }

    fn act_points(&self, gamma: &GroupElement) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            *p = gamma.act_point(p);
        }
        out
    }

    fn anchors(&self) -> Vec<DVector<f64>> {
        let mut out = self.points.clone();
        out.extend(self.cameras.iter().filter_map(Camera::center));
        out
    }
}

/// Evaluates `F` at a static scene.
pub fn evaluate(scene: &Scene) -> Result<Measurements> {
    scene.evaluate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::catalog;
    use crate::sfm::synth::random_scene;

    #[test]
    fn single_pair_reduces_to_project() {
        for c in catalog() {
            let scene = random_scene(c.kind, 1, 1, 3).unwrap();
            let meas = scene.evaluate().unwrap();
            let direct = scene.cameras[0].project(&scene.globals, &scene.points[0]).unwrap();
            assert_eq!(meas.data[0], direct);
        }
    }

    #[test]
    fn flattened_length() {
        for c in catalog() {
            for (n, m) in [(2, 3), (5, 1), (4, 4)] {
                let scene = random_scene(c.kind, n, m, 9).unwrap();
                assert_eq!(scene.evaluate().unwrap().flatten().len(), c.s * n * m);
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let scene = random_scene(CameraKind::Perspective3d, 3, 2, 1).unwrap();
        let x = scene.coords();
        assert_eq!(x.len(), 3 * 3 + 6 * 2 + 1);
        assert_eq!(scene.with_coords(&x).unwrap(), scene);
        assert!(scene.with_coords(&DVector::zeros(4)).is_err());
    }

    #[test]
    fn singular_error_carries_location() {
        let mut scene = random_scene(CameraKind::OmniOriented2d, 3, 2, 4).unwrap();
        scene.points[2] = scene.cameras[1].center().unwrap();
        match scene.evaluate() {
            Err(Error::SingularAt { point, camera, .. }) => assert_eq!((point, camera), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation() {
        let scene = random_scene(CameraKind::Omni2d, 2, 2, 0).unwrap();
        let mut bad = scene.clone();
        bad.cameras[0].kind = CameraKind::OmniOriented2d;
        assert!(bad.validate().is_err());
        assert!(Scene::new(scene.kind, vec![], scene.cameras.clone(), vec![]).is_err());
    }
}
