//! Point-camera symmetry groups: elements, their action on scenes, the Lie
//! algebra generators at a scene, and alignment modulo the group.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::{uniform_rotation, Camera, CameraKind, Family, GroupKind};
use crate::error::{Error, Result};
use crate::rotation;
use crate::sfm::Configuration;

const MEMBERSHIP_TOL: f64 = 1e-12;

/// `P -> scale * R P + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub scale: f64,
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl GroupElement {
    pub fn identity(d: usize) -> Self {
        Self {
            scale: 1.0,
            rotation: DMatrix::identity(d, d),
            translation: DVector::zeros(d),
        }
    }

    pub fn translation(v: DVector<f64>) -> Self {
        let d = v.len();
        Self { translation: v, ..Self::identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn act_point(&self, p: &DVector<f64>) -> DVector<f64> {
        self.scale * (&self.rotation * p) + &self.translation
    }

    /// Action on displacement vectors (no translation).
    pub fn act_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        self.scale * (&self.rotation * v)
    }

    pub fn belongs_to(&self, group: GroupKind) -> bool {
        let d = self.dim();
        if !rotation::is_rotation(&self.rotation, MEMBERSHIP_TOL) || self.scale.is_nan() || self.scale <= 0.0 {
            return false;
        }
        let scale_ok = group.has_scale() || (self.scale - 1.0).abs() < MEMBERSHIP_TOL;
        let rot_ok = group.has_rotation()
            || (&self.rotation - DMatrix::identity(d, d)).norm() < MEMBERSHIP_TOL;
        scale_ok && rot_ok
    }

    fn check_member(&self, kind: CameraKind) -> Result<()> {
        let class = kind.class();
        if self.dim() != class.d || !self.belongs_to(class.group) {
            return Err(Error::GroupMismatch { class: class.name, group: class.group.name() });
        }
        Ok(())
    }

    /// Transformed camera, such that images of transformed points are unchanged.
    pub fn act_camera(&self, camera: &Camera) -> Result<Camera> {
        self.check_member(camera.kind)?;
        let class = camera.class();
        let d = class.d;
        let mut params = camera.params.clone();
        if let Some(r) = Camera::center_range(camera.kind) {
            let c = self.act_point(&DVector::from_column_slice(&params[r.clone()]));
            params[r].copy_from_slice(c.as_slice());
        }
        let new_rot = &self.rotation * camera.rotation();
        if let Some(r) = Camera::rotation_range(camera.kind) {
            params[r].copy_from_slice(&rotation::log(&new_rot));
        }
        match camera.kind.family() {
            Family::AffineOrtho => {
                let shift = new_rot.transpose() * &self.translation;
                let so = rotation::so_dim(d);
                for k in 0..class.s {
                    params[so + k] -= shift[k];
                }
            }
            Family::Line => {
                let u = camera.line_direction();
                let u = &self.rotation * DVector::from_column_slice(u.as_slice());
                params[0] = u[2].clamp(-1.0, 1.0).acos();
                params[1] = u[1].atan2(u[0]);
                params[2] += u.dot(&self.translation);
            }
            // focal lengths are image-scale factors and stay fixed
            _ => {}
        }
        Ok(Camera { kind: camera.kind, params })
    }

    /// Applies the element to a whole configuration.
    pub fn act<C: Configuration>(&self, config: &C) -> Result<C> {
        self.check_member(config.kind())?;
        let mut out = config.act_points(self);
        for cam in out.cameras_mut() {
            *cam = self.act_camera(cam)?;
        }
        Ok(out)
    }
}

/// Free function form of [`GroupElement::act_point`].
pub fn act_point(gamma: &GroupElement, p: &DVector<f64>) -> DVector<f64> {
    gamma.act_point(p)
}

/// Free function form of [`GroupElement::act_camera`].
pub fn act_camera(gamma: &GroupElement, camera: &Camera) -> Result<Camera> {
    gamma.act_camera(camera)
}

/// Lie-algebra element: `P -> scale P + rot P + translation` to first order.
#[derive(Debug, Clone)]
pub struct Infinitesimal {
    pub scale: f64,
    pub rot: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl Infinitesimal {
    pub fn point_rate(&self, p: &DVector<f64>) -> DVector<f64> {
        self.scale * p + &self.rot * p + &self.translation
    }

    pub fn vector_rate(&self, v: &DVector<f64>) -> DVector<f64> {
        self.scale * v + &self.rot * v
    }

    /// Tangent of a camera's parameter vector.
    pub fn camera_rate(&self, camera: &Camera) -> Vec<f64> {
        let class = camera.class();
        let d = class.d;
        let mut out = vec![0.0; class.f];
        if let Some(r) = Camera::center_range(camera.kind) {
            let c = camera.center().unwrap();
            out[r].copy_from_slice(self.point_rate(&c).as_slice());
        }
        if let Some(r) = Camera::rotation_range(camera.kind) {
            let rate = rotation::coords_rate(d, &camera.params[r.clone()], &self.rot);
            out[r].copy_from_slice(&rate);
        }
        match camera.kind.family() {
            Family::AffineOrtho => {
                let shift = camera.rotation().transpose() * &self.translation;
                let so = rotation::so_dim(d);
                for k in 0..class.s {
                    out[so + k] = -shift[k];
                }
            }
            Family::Line => {
                let u = camera.line_direction();
                let du = &self.rot * DVector::from_column_slice(u.as_slice());
                let du = Vector3::new(du[0], du[1], du[2]);
                let (st, ct) = camera.params[0].sin_cos();
                let (sp, cp) = camera.params[1].sin_cos();
                let d_polar = Vector3::new(ct * cp, ct * sp, -st);
                let d_azimuth = Vector3::new(-st * sp, st * cp, 0.0);
                out[0] = d_polar.dot(&du);
                out[1] = d_azimuth.dot(&du) / (st * st);
                out[2] = u.dot(&Vector3::new(
                    self.translation[0],
                    self.translation[1],
                    self.translation[2],
                ));
            }
            _ => {}
        }
        out
    }
}

/// Basis of the Lie algebra: translations, then rotations, then scaling.
pub fn algebra_basis(group: GroupKind, d: usize) -> Vec<Infinitesimal> {
    let zero = Infinitesimal {
        scale: 0.0,
        rot: DMatrix::zeros(d, d),
        translation: DVector::zeros(d),
    };
    let mut out = Vec::with_capacity(group.dim(d));
    for k in 0..d {
        let mut xi = zero.clone();
        xi.translation[k] = 1.0;
        out.push(xi);
    }
    if group.has_rotation() {
        for w in rotation::skew_basis(d) {
            out.push(Infinitesimal { rot: w, ..zero.clone() });
        }
    }
    if group.has_scale() {
        out.push(Infinitesimal { scale: 1.0, ..zero });
    }
    out
}

/// Tangent vectors of the one-parameter subgroups at a configuration, one
/// column per group generator, in the configuration's coordinate order.
pub fn generators<C: Configuration>(config: &C) -> Result<DMatrix<f64>> {
    generators_in(config.kind().class().group, config)
}

/// [`generators`] for an explicitly chosen group acting on the configuration.
pub fn generators_in<C: Configuration>(group: GroupKind, config: &C) -> Result<DMatrix<f64>> {
    config.evaluate()?;
    let basis = algebra_basis(group, config.kind().class().d);
    let mut out = DMatrix::zeros(config.dim(), basis.len());
    for (col, xi) in basis.iter().enumerate() {
        let mut row = 0;
        for i in 0..config.n_points() {
            for v in config.point_tangent(i, xi) {
                out[(row, col)] = v;
                row += 1;
            }
        }
        for cam in config.cameras() {
            for v in xi.camera_rate(cam) {
                out[(row, col)] = v;
                row += 1;
            }
        }
    }
    Ok(out)
}

/// Deterministic random element: scale uniform in `[0.5, 2]` when the group
/// has one, Haar-uniform rotation when it has one, translation in `[-5, 5]^d`.
pub fn random_element(group: GroupKind, d: usize, seed: u64) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(group, d, &mut rng)
}

pub(crate) fn random_element_with<R: Rng>(group: GroupKind, d: usize, rng: &mut R) -> GroupElement {
    let scale = if group.has_scale() { rng.random_range(0.5..=2.0) } else { 1.0 };
    let rotation = if group.has_rotation() {
        rotation::exp(d, &uniform_rotation(rng, d))
    } else {
        DMatrix::identity(d, d)
    };
    let translation = DVector::from_fn(d, |_, _| rng.random_range(-5.0..=5.0));
    GroupElement { scale, rotation, translation }
}

/// Finds the group element moving `a` closest to `b` in the least-squares
/// sense over anchor positions (points and exposed camera centers), with the
/// RMS anchor distance left over.
pub fn align<C: Configuration>(a: &C, b: &C) -> Result<(GroupElement, f64)> {
    align_in(a.kind().class().group, a, b)
}

/// [`align`] over an explicitly chosen group, e.g. similarity for a class
/// whose nominal group is smaller than its true symmetry.
pub fn align_in<C: Configuration>(group: GroupKind, a: &C, b: &C) -> Result<(GroupElement, f64)> {
    if a.kind() != b.kind() || a.n_points() != b.n_points() || a.n_cameras() != b.n_cameras() {
        return Err(Error::Shape("aligned configurations differ in class or size".into()));
    }
    let d = a.kind().class().d;
    let xs = a.anchors();
    let ys = b.anchors();
    let count = xs.len() as f64;
    let mean = |v: &[DVector<f64>]| v.iter().fold(DVector::zeros(d), |acc, p| acc + p) / count;
    let (mx, my) = (mean(&xs), mean(&ys));
    let ax: Vec<_> = xs.iter().map(|p| p - &mx).collect();
    let by: Vec<_> = ys.iter().map(|p| p - &my).collect();
    let spread: f64 = ax.iter().map(|p| p.norm_squared()).sum();
    if spread <= 1e-24 {
        return Err(Error::Degenerate("all anchor positions coincide".into()));
    }

    let mut rot = DMatrix::identity(d, d);
    let mut cross = DMatrix::zeros(d, d);
    for (x, y) in ax.iter().zip(&by) {
        cross += y * x.transpose();
    }
    let scale_num = if group.has_rotation() {
        let mut cov = DMatrix::zeros(d, d);
        for x in &ax {
            cov += x * x.transpose();
        }
        let mut sv: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
        sv.sort_by(|p, q| q.total_cmp(p));
        if sv[d - 2] <= 1e-12 * sv[0] {
            return Err(Error::Degenerate("anchors are collinear; rotation not identifiable".into()));
        }
        let svd = cross.clone().svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut fix = DMatrix::identity(d, d);
        if (&u * &v_t).determinant() < 0.0 {
            fix[(d - 1, d - 1)] = -1.0;
        }
        rot = &u * &fix * &v_t;
        (0..d).map(|k| svd.singular_values[k] * fix[(k, k)]).sum::<f64>()
    } else {
        cross.trace()
    };
    let scale = if group.has_scale() { scale_num / spread } else { 1.0 };
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::Degenerate("best-fit scale is not positive".into()));
    }
    let translation = &my - scale * (&rot * &mx);
    let gamma = GroupElement { scale, rotation: rot, translation };
    let sq: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (gamma.act_point(x) - y).norm_squared())
        .sum();
    Ok((gamma, (sq / count).sqrt()))
}
