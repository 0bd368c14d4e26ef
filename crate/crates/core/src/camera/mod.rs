//! Camera classes as parameterized projections onto a retinal surface.
//!
//! Every camera is an idempotent map `Q: R^d -> R^d` whose image is the
//! retinal surface. [`Camera::project`] returns chart coordinates on that
//! surface, [`Camera::embed`] maps chart coordinates back to ambient space and
//! [`Camera::camera_map`] is their composition.
//!
//! Rotation blocks hold the camera-to-world orientation `R` in exponential
//! coordinates; camera-frame coordinates of a point are `R^T (P - C)`.

mod catalog;

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use catalog::{catalog, lookup, CameraClass, CameraKind, Family, GroupKind, KNOWN_FOCAL};

use crate::error::{Error, Result};
use crate::rotation::{self, wrap_angle};

/// Distance below which a point is considered to hit a camera singularity.
pub const SINGULAR_CUTOFF: f64 = 1e-9;

/// Chart coordinates of an image point on the retinal surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RetinalPoint {
    pub coords: Vec<f64>,
}

impl RetinalPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub kind: CameraKind,
    pub params: Vec<f64>,
}

impl Camera {
    pub fn new(kind: CameraKind, params: Vec<f64>) -> Result<Self> {
        let cam = Self { kind, params };
        cam.validate()?;
        Ok(cam)
    }

    pub fn class(&self) -> &'static CameraClass {
        self.kind.class()
    }

    pub fn validate(&self) -> Result<()> {
        let class = self.class();
        if self.params.len() != class.f {
            return Err(Error::Shape(format!(
                "{} camera expects {} parameters, got {}",
                class.name,
                class.f,
                self.params.len()
            )));
        }
        if self.params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite camera parameter".into()));
        }
        if self.kind.family() == Family::PerspectiveZoom && self.params[class.f - 1] == 0.0 {
            return Err(Error::InvalidArgument("zero focal length".into()));
        }
        Ok(())
    }

    /// Parameter indices of the projection center, when the class has one.
    pub fn center_range(kind: CameraKind) -> Option<Range<usize>> {
        let d = kind.class().d;
        match kind.family() {
            Family::AffineOrtho | Family::Line => None,
            _ => Some(0..d),
        }
    }

    /// Parameter indices of the exponential-coordinate rotation block.
    pub fn rotation_range(kind: CameraKind) -> Option<Range<usize>> {
        let d = kind.class().d;
        let so = rotation::so_dim(d);
        match kind.family() {
            Family::AffineOrtho => Some(0..so),
            Family::OmniOriented | Family::Line => None,
            _ => Some(d..d + so),
        }
    }

    pub fn center(&self) -> Option<DVector<f64>> {
        Self::center_range(self.kind).map(|r| DVector::from_column_slice(&self.params[r]))
    }

    /// Camera-to-world orientation; identity for classes without one.
    pub fn rotation(&self) -> DMatrix<f64> {
        let d = self.class().d;
        match Self::rotation_range(self.kind) {
            Some(r) => rotation::exp(d, &self.params[r]),
            None => DMatrix::identity(d, d),
        }
    }

    pub fn focal(&self, globals: &[f64]) -> f64 {
        match self.kind.family() {
            Family::Perspective => globals[0],
            Family::PerspectiveZoom => self.params[self.class().f - 1],
            _ => KNOWN_FOCAL,
        }
    }

    /// Unit direction of a line camera.
    pub fn line_direction(&self) -> Vector3<f64> {
        let (st, ct) = self.params[0].sin_cos();
        let (sp, cp) = self.params[1].sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    fn check_inputs(&self, globals: &[f64], len: usize, what: &str) -> Result<()> {
        let class = self.class();
        if globals.len() != class.h {
            return Err(Error::Shape(format!(
                "{} expects {} global parameters, got {}",
                class.name,
                class.h,
                globals.len()
            )));
        }
        let want = if what == "point" { class.d } else { class.s };
        if len != want {
            return Err(Error::Shape(format!(
                "{} expects a {what} of length {want}, got {len}",
                class.name
            )));
        }
        Ok(())
    }

    /// Chart coordinates of `Q(P)`.
    pub fn project(&self, globals: &[f64], point: &DVector<f64>) -> Result<RetinalPoint> {
        self.check_inputs(globals, point.len(), "point")?;
        let class = self.class();
        let d = class.d;
        let coords = match self.kind.family() {
            Family::AffineOrtho => {
                let q = self.rotation().transpose() * point;
                let t = &self.params[rotation::so_dim(d)..];
                (0..class.s).map(|k| q[k] + t[k]).collect()
            }
            Family::OmniOriented | Family::Omni => {
                let diff = point - self.center().unwrap();
                if diff.norm() < SINGULAR_CUTOFF {
                    return Err(Error::Singular("point coincides with the camera center".into()));
                }
                direction_angles(&(self.rotation().transpose() * diff))
            }
            Family::Perspective | Family::PerspectiveKnown | Family::PerspectiveZoom => {
                let q = self.rotation().transpose() * (point - self.center().unwrap());
                let depth = q[d - 1];
                if depth.abs() < SINGULAR_CUTOFF {
                    return Err(Error::Singular("point on the principal plane".into()));
                }
                let focal = self.focal(globals);
                (0..d - 1).map(|k| focal * q[k] / depth).collect()
            }
            Family::Line => {
                let u = self.line_direction();
                vec![u.x * point[0] + u.y * point[1] + u.z * point[2] - self.params[2]]
            }
        };
        Ok(RetinalPoint { coords })
    }

    /// Ambient point on the retinal surface with chart coordinates `r`.
    pub fn embed(&self, globals: &[f64], r: &RetinalPoint) -> Result<DVector<f64>> {
        self.check_inputs(globals, r.coords.len(), "retinal point")?;
        if r.coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfChart("non-finite coordinate".into()));
        }
        let class = self.class();
        let d = class.d;
        let c = &r.coords;
        let out = match self.kind.family() {
            Family::AffineOrtho => {
                let t = &self.params[rotation::so_dim(d)..];
                let mut local = DVector::zeros(d);
                for k in 0..class.s {
                    local[k] = c[k] - t[k];
                }
                self.rotation() * local
            }
            Family::OmniOriented | Family::Omni => {
                if c[0] <= -PI || c[0] > PI {
                    return Err(Error::OutOfChart(format!("azimuth {} outside (-pi, pi]", c[0])));
                }
                if d == 3 && c[1].abs() > PI / 2.0 {
                    return Err(Error::OutOfChart(format!(
                        "elevation {} outside [-pi/2, pi/2]",
                        c[1]
                    )));
                }
                self.center().unwrap() + self.rotation() * angles_direction(c)
            }
            Family::Perspective | Family::PerspectiveKnown | Family::PerspectiveZoom => {
                let mut local = DVector::zeros(d);
                local.rows_mut(0, d - 1).copy_from_slice(c);
                local[d - 1] = self.focal(globals);
                self.center().unwrap() + self.rotation() * local
            }
            Family::Line => {
                let u = self.line_direction();
                let t = c[0] + self.params[2];
                DVector::from_column_slice(&[t * u.x, t * u.y, t * u.z])
            }
        };
        Ok(out)
    }

    /// The idempotent ambient map `Q = embed . project`.
    pub fn camera_map(&self, globals: &[f64], point: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.project(globals, point)?;
        self.embed(globals, &r)
    }
}

/// Bearing angles of a direction: `[azimuth]` in 2D, `[azimuth, elevation]` in 3D.
pub fn direction_angles(v: &DVector<f64>) -> Vec<f64> {
    let az = wrap_angle(v[1].atan2(v[0]));
    if v.len() == 2 {
        vec![az]
    } else {
        vec![az, v[2].atan2(v[0].hypot(v[1]))]
    }
}

/// Unit direction from bearing angles.
pub fn angles_direction(a: &[f64]) -> DVector<f64> {
    let (sa, ca) = a[0].sin_cos();
    if a.len() == 1 {
        DVector::from_column_slice(&[ca, sa])
    } else {
        let (se, ce) = a[1].sin_cos();
        DVector::from_column_slice(&[ce * ca, ce * sa, se])
    }
}

/// Orthonormal basis of the tangent plane of the unit sphere at `u`.
fn tangent_basis(u: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axis = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vector3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = axis.cross(u).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

/// Residual between a measured and a predicted image point, in local
/// coordinates at the measurement.
///
/// Linear charts subtract, circle charts subtract and wrap, and the sphere
/// chart returns the predicted direction in a tangent basis at the measured
/// direction so that chart poles never enter a residual.
pub fn retinal_residual(kind: CameraKind, measured: &RetinalPoint, predicted: &RetinalPoint) -> Vec<f64> {
    let (m, p) = (&measured.coords, &predicted.coords);
    if !kind.angular() {
        return p.iter().zip(m).map(|(a, b)| a - b).collect();
    }
    if m.len() == 1 {
        return vec![wrap_angle(p[0] - m[0])];
    }
    let um = angles_direction(m);
    let up = angles_direction(p);
    let um = Vector3::new(um[0], um[1], um[2]);
    let up = Vector3::new(up[0], up[1], up[2]);
    let (e1, e2) = tangent_basis(&um);
    vec![e1.dot(&up), e2.dot(&up)]
}

pub(crate) fn uniform_rotation<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    if d == 2 {
        return vec![wrap_angle(rng.random_range(-PI..PI))];
    }
    // Shoemake's uniform quaternion.
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let q = nalgebra::Quaternion::new(
        u1.sqrt() * (2.0 * PI * u3).cos(),
        (1.0 - u1).sqrt() * (2.0 * PI * u2).sin(),
        (1.0 - u1).sqrt() * (2.0 * PI * u2).cos(),
        u1.sqrt() * (2.0 * PI * u3).sin(),
    );
    let w = nalgebra::UnitQuaternion::from_quaternion(q).scaled_axis();
    vec![w.x, w.y, w.z]
}

/// Deterministic random camera of the given class.
///
/// Positions and offsets are uniform in `[-spread, spread]`, rotations are
/// Haar-uniform, focal lengths are uniform in `[0.5, 2] * spread`.
pub fn random_camera(kind: CameraKind, seed: u64, spread: f64) -> Result<Camera> {
    if spread.is_nan() || spread <= 0.0 {
        return Err(Error::InvalidArgument(format!("spread must be positive, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_camera_with(kind, &mut rng, spread))
}

pub(crate) fn random_camera_with<R: Rng>(kind: CameraKind, rng: &mut R, spread: f64) -> Camera {
    let d = kind.class().d;
    let uniform = |n: usize, rng: &mut R| -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-spread..=spread)).collect()
    };
    let params = match kind.family() {
        Family::AffineOrtho => {
            let mut p = uniform_rotation(rng, d);
            p.extend(uniform(d - 1, rng));
            p
        }
        Family::OmniOriented => uniform(d, rng),
        Family::Omni | Family::Perspective | Family::PerspectiveKnown => {
            let mut p = uniform(d, rng);
            p.extend(uniform_rotation(rng, d));
            p
        }
        Family::PerspectiveZoom => {
            let mut p = uniform(d, rng);
            p.extend(uniform_rotation(rng, d));
            p.push(rng.random_range(0.5..=2.0) * spread);
            p
        }
        Family::Line => {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let az = rng.random_range(-PI..PI);
            vec![z.acos(), az, rng.random_range(-spread..=spread)]
        }
    };
    Camera { kind, params }
}

/// Random scene-level globals (the shared focal length where the class has one).
pub(crate) fn random_globals<R: Rng>(kind: CameraKind, rng: &mut R, spread: f64) -> Vec<f64> {
    (0..kind.class().h)
        .map(|_| rng.random_range(0.5..=2.0) * spread)
        .collect()
}
