use nalgebra::DVector;

use super::{validate_rig, Configuration};
use crate::camera::{Camera, CameraKind};
use crate::error::{Error, Result};
use crate::rotation::rot2;
use crate::symmetry::{GroupElement, Infinitesimal};

/// How a moving point is described.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionModel {
    /// Planar uniform circular motion with known angular velocity.
    /// Coefficients are `[center, radius vector]`.
    Circle { omega: f64 },
    /// Polynomial `sum_l P_l t^l` with `order + 1` coefficients.
    Taylor { order: usize },
}

impl MotionModel {
    pub fn coefficient_count(&self) -> usize {
        match self {
            MotionModel::Circle { .. } => 2,
            MotionModel::Taylor { order } => order + 1,
        }
    }
}

/// Position at time `t` of a point with the given motion coefficients.
pub fn jet_position(model: &MotionModel, coeffs: &[DVector<f64>], t: f64) -> DVector<f64> {
    match model {
        MotionModel::Circle { omega } => &coeffs[0] + rot2(omega * t) * &coeffs[1],
        MotionModel::Taylor { .. } => {
            let mut out = DVector::zeros(coeffs[0].len());
            let mut power = 1.0;
            for c in coeffs {
                out += c * power;
                power *= t;
            }
            out
        }
    }
}

/// Scene of moving points observed by `m` cameras at known times.
#[derive(Debug, Clone, PartialEq)]
pub struct JetScene {
    pub kind: CameraKind,
    pub model: MotionModel,
    /// Per-point motion coefficients.
    pub motion: Vec<Vec<DVector<f64>>>,
    /// Observation time of each camera.
    pub times: Vec<f64>,
    pub cameras: Vec<Camera>,
    pub globals: Vec<f64>,
}

impl JetScene {
    pub fn new(
        kind: CameraKind,
        model: MotionModel,
        motion: Vec<Vec<DVector<f64>>>,
        times: Vec<f64>,
        cameras: Vec<Camera>,
        globals: Vec<f64>,
    ) -> Result<Self> {
        let js = Self { kind, model, motion, times, cameras, globals };
        js.validate()?;
        Ok(js)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.kind.class().d;
        if self.motion.is_empty() || self.cameras.is_empty() {
            return Err(Error::Shape("a scene needs at least one point and one camera".into()));
        }
        if self.times.len() != self.cameras.len() {
            return Err(Error::Shape(format!(
                "{} observation times for {} cameras",
                self.times.len(),
                self.cameras.len()
            )));
        }
        if self.times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidArgument("observation times must increase strictly".into()));
        }
        if matches!(self.model, MotionModel::Circle { .. }) && d != 2 {
            return Err(Error::InvalidArgument("circle motion is planar".into()));
        }
        let count = self.model.coefficient_count();
        for coeffs in &self.motion {
            if coeffs.len() != count || coeffs.iter().any(|c| c.len() != d) {
                return Err(Error::Shape(format!("each point needs {count} coefficients of length {d}")));
            }
            if matches!(self.model, MotionModel::Circle { .. }) && coeffs[1].norm() == 0.0 {
                return Err(Error::InvalidArgument("circle radius vector must be nonzero".into()));
            }
        }
        validate_rig(self.kind, &self.cameras, &self.globals)
    }
}

impl Configuration for JetScene {
    fn kind(&self) -> CameraKind {
        self.kind
    }

    fn n_points(&self) -> usize {
        self.motion.len()
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
        self.kind.class().d * self.model.coefficient_count()
    }

    fn point_coords(&self, i: usize) -> Vec<f64> {
        self.motion[i].iter().flat_map(|c| c.iter().copied()).collect()
    }

    fn set_point_coords(&mut self, i: usize, x: &[f64]) {
        let d = self.kind.class().d;
        for (l, c) in self.motion[i].iter_mut().enumerate() {
            c.copy_from_slice(&x[l * d..(l + 1) * d]);
        }
    }

    fn observed_point(&self, i: usize, j: usize) -> DVector<f64> {
        jet_position(&self.model, &self.motion[i], self.times[j])
    }

    fn point_tangent(&self, i: usize, xi: &Infinitesimal) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.point_dim());
        for (l, c) in self.motion[i].iter().enumerate() {
            let rate = if l == 0 { xi.point_rate(c) } else { xi.vector_rate(c) };
            out.extend(rate.iter().copied());
        }
        out
    }

    fn act_points(&self, gamma: &GroupElement) -> Self {
        let mut out = self.clone();
        for coeffs in &mut out.motion {
            for (l, c) in coeffs.iter_mut().enumerate() {
                *c = if l == 0 { gamma.act_point(c) } else { gamma.act_vector(c) };
            }
        }
        out
    }

    fn anchors(&self) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for coeffs in &self.motion {
            out.push(coeffs[0].clone());
            out.extend(coeffs[1..].iter().map(|c| &coeffs[0] + c));
        }
        out.extend(self.cameras.iter().filter_map(Camera::center));
        out
    }
}

/// Tangent of the rotating drift of a circle scene: every radius vector moves
/// by `b` and camera `j` by `R(omega t_j) b`. Each point then stays at the
/// same offset from each camera at the observation times, so for classes
/// whose data depend on `P - C` and on the orientation only, the image data
/// do not change. Returns `None` for Taylor models or classes without a
/// camera center.
pub fn circle_drift(scene: &JetScene, b: &DVector<f64>) -> Option<DVector<f64>> {
    let MotionModel::Circle { omega } = scene.model else {
        return None;
    };
    let centers = Camera::center_range(scene.kind)?;
    let pd = scene.point_dim();
    let f = scene.kind.class().f;
    let n = scene.n_points();
    let mut v = DVector::zeros(scene.dim());
    for i in 0..n {
        v.rows_mut(i * pd + 2, 2).copy_from(b);
    }
    for (j, &t) in scene.times.iter().enumerate() {
        let shift = rot2(omega * t) * b;
        v.rows_mut(n * pd + j * f + centers.start, 2).copy_from(&shift);
    }
    Some(v)
}
