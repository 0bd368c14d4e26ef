//! Exponential coordinates for SO(2) and SO(3), plus the skew generators of
//! their Lie algebras.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Rotation3, Vector3};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Dimension of SO(d) for d in {2, 3}.
pub fn so_dim(d: usize) -> usize {
    d * (d - 1) / 2
}

pub fn rot2(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Rotation matrix from exponential coordinates (1 in 2D, 3 in 3D).
pub fn exp(d: usize, w: &[f64]) -> DMatrix<f64> {
    match d {
        2 => rot2(w[0]),
        3 => {
            let r = Rotation3::from_scaled_axis(Vector3::new(w[0], w[1], w[2]));
            DMatrix::from_column_slice(3, 3, r.matrix().as_slice())
        }
        _ => panic!("rotations only in 2 or 3 dimensions"),
    }
}

/// Exponential coordinates of a rotation matrix. The 3D angle lies in `[0, pi]`.
pub fn log(r: &DMatrix<f64>) -> Vec<f64> {
    match r.nrows() {
        2 => vec![r[(1, 0)].atan2(r[(0, 0)])],
        3 => {
            let m = Matrix3::from_column_slice(r.as_slice());
            let w = Rotation3::from_matrix_unchecked(m).scaled_axis();
            vec![w.x, w.y, w.z]
        }
        _ => panic!("rotations only in 2 or 3 dimensions"),
    }
}

/// Basis of skew-symmetric generators: one in 2D, `[e_k]x` for k = 0..3 in 3D.
pub fn skew_basis(d: usize) -> Vec<DMatrix<f64>> {
    match d {
        2 => vec![DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        3 => (0..3)
            .map(|k| {
                let h = hat(&Vector3::ith(k, 1.0));
                DMatrix::from_column_slice(3, 3, h.as_slice())
            })
            .collect(),
        _ => panic!("rotations only in 2 or 3 dimensions"),
    }
}

/// Inverse left Jacobian of SO(3): maps a left-multiplied angular velocity
/// `R -> exp(t W) R` to the rate of change of the exponential coordinates.
pub fn left_jacobian_inv(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat(w);
    let coef = if theta < 1e-4 {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        1.0 / (theta * theta) - 1.0 / (2.0 * theta * (theta / 2.0).tan())
    };
    Matrix3::identity() - 0.5 * k + coef * k * k
}

/// Rate of change of exponential coordinates under `R -> exp(t W) R`.
pub fn coords_rate(d: usize, w: &[f64], generator: &DMatrix<f64>) -> Vec<f64> {
    match d {
        2 => vec![generator[(1, 0)]],
        3 => {
            let v = Vector3::new(generator[(2, 1)], generator[(0, 2)], generator[(1, 0)]);
            let rate = left_jacobian_inv(&Vector3::new(w[0], w[1], w[2])) * v;
            vec![rate.x, rate.y, rate.z]
        }
        _ => panic!("rotations only in 2 or 3 dimensions"),
    }
}

pub fn is_rotation(r: &DMatrix<f64>, tol: f64) -> bool {
    r.is_square()
        && (r.transpose() * r - DMatrix::identity(r.nrows(), r.nrows())).norm() < tol
        && r.determinant() > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrap_range() {
        assert_relative_eq!(wrap_angle(3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(0.5), 0.5);
        assert_relative_eq!(wrap_angle(-0.5 - 4.0 * PI), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn exp_log_round_trip() {
        let w = [0.3, -1.2, 2.0];
        let r = exp(3, &w);
        assert!(is_rotation(&r, 1e-12));
        let back = log(&r);
        for k in 0..3 {
            assert_relative_eq!(back[k], w[k], epsilon = 1e-12);
        }
        assert_relative_eq!(log(&rot2(2.5))[0], 2.5, epsilon = 1e-15);
    }

    #[test]
    fn coords_rate_matches_finite_difference() {
        let w = [0.4, 0.9, -2.6];
        let eps = 1e-6;
        for gen in skew_basis(3) {
            let rate = coords_rate(3, &w, &gen);
            let r = exp(3, &w);
            let plus = log(&(exp3_of(&gen, eps) * &r));
            let minus = log(&(exp3_of(&gen, -eps) * &r));
            for k in 0..3 {
                let fd = (plus[k] - minus[k]) / (2.0 * eps);
                assert_relative_eq!(fd, rate[k], epsilon = 1e-7);
            }
        }
    }

    fn exp3_of(gen: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
        exp(3, &[gen[(2, 1)] * t, gen[(0, 2)] * t, gen[(1, 0)] * t])
    }
}
