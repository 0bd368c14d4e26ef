use nalgebra::{DMatrix, DVector};

use super::{Configuration, Measurements};
use crate::camera::retinal_residual;
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-6;

/// Residuals `F(config) - measured` in local chart coordinates, flattened
/// row-major over `(point, camera)`.
pub fn residuals<C: Configuration>(config: &C, measured: &Measurements) -> Result<DVector<f64>> {
    let predicted = config.evaluate()?;
    if predicted.n != measured.n || predicted.m != measured.m || predicted.s != measured.s {
        return Err(Error::Shape(format!(
            "measurements are {} x {} x {}, scene produces {} x {} x {}",
            measured.n, measured.m, measured.s, predicted.n, predicted.m, predicted.s
        )));
    }
    let kind = config.kind();
    let mut out = Vec::with_capacity(predicted.s * predicted.data.len());
    for (m, p) in measured.data.iter().zip(&predicted.data) {
        out.extend(retinal_residual(kind, m, p));
    }
    Ok(DVector::from_vec(out))
}

/// Central-difference Jacobian of the flattened image data over the full
/// coordinate vector: `s n m` rows, one column per coordinate.
pub fn jacobian<C: Configuration>(config: &C, step: f64) -> Result<DMatrix<f64>> {
    let cols: Vec<usize> = (0..config.dim()).collect();
    jacobian_columns(config, step, &cols)
}

/// Central-difference Jacobian restricted to the listed coordinates.
pub fn jacobian_columns<C: Configuration>(config: &C, step: f64, cols: &[usize]) -> Result<DMatrix<f64>> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let base = config.evaluate()?;
    let x0 = config.coords();
    let rows = base.s * base.n * base.m;
    let mut jac = DMatrix::zeros(rows, cols.len());
    let mut x = x0.clone();
    for (c, &k) in cols.iter().enumerate() {
        x[k] = x0[k] + step;
        let plus = residuals(&config.with_coords(&x)?, &base)?;
        x[k] = x0[k] - step;
        let minus = residuals(&config.with_coords(&x)?, &base)?;
        x[k] = x0[k];
        jac.set_column(c, &((plus - minus) / (2.0 * step)));
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{catalog, Camera, CameraKind};
    use crate::sfm::synth::random_scene;
    use crate::sfm::Scene;

    #[test]
    fn orthographic_point_block_is_projection() {
        let scene = Scene::new(
            CameraKind::AffineOrtho3d,
            vec![DVector::from_column_slice(&[0.3, -0.2, 0.7])],
            vec![Camera::new(CameraKind::AffineOrtho3d, vec![0.0; 5]).unwrap()],
            vec![],
        )
        .unwrap();
        let j = jacobian(&scene, DEFAULT_STEP).unwrap();
        let want = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((j.columns(0, 3) - want).amax() < 1e-9);
        assert_eq!(j.ncols(), 3 + 5);
    }

    #[test]
    fn step_halving_consistency() {
        for c in catalog() {
            let scene = random_scene(c.kind, 3, 3, 40).unwrap();
            let a = jacobian(&scene, 1e-5).unwrap();
            let b = jacobian(&scene, 1e-6).unwrap();
            let scale = a.amax();
            for (x, y) in a.iter().zip(b.iter()) {
                let err = (x - y).abs();
                assert!(err <= 1e-4 * x.abs().max(1e-3 * scale), "{}: {x} vs {y}", c.name);
            }
        }
    }

    #[test]
    fn rejects_bad_step() {
        let scene = random_scene(CameraKind::Omni2d, 2, 2, 0).unwrap();
        assert!(jacobian(&scene, 0.0).is_err());
    }

    #[test]
    fn residuals_shape_mismatch() {
        let a = random_scene(CameraKind::Omni2d, 2, 2, 0).unwrap();
        let b = random_scene(CameraKind::Omni2d, 3, 2, 0).unwrap();
        assert!(matches!(residuals(&a, &b.evaluate().unwrap()), Err(Error::Shape(_))));
    }
}
