//! Inverting the structure-from-motion map at feasible configurations:
//! gauge fixing plus damped Gauss-Newton (Levenberg-Marquardt) refinement.

mod gauge;

use nalgebra::{DMatrix, DVector};

pub use gauge::{default_priority, gauge_fix, gauge_fix_ordered, local_uniqueness, GaugeChart, UniquenessReport};

use crate::counting::{feasible, Counts};
use crate::error::{Error, Result};
use crate::symmetry::GroupElement;
use crate::sfm::{jacobian_columns, residuals, Configuration, JetScene, Measurements, Scene, DEFAULT_STEP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Stop when the gradient norm of the half squared residual drops below this.
    pub gradient_tol: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_tol: f64,
    /// Largest final RMSE reported as converged.
    pub rmse_tol: f64,
    /// Largest final gradient norm reported as converged.
    pub gradient_accept: f64,
    pub initial_damping: f64,
    pub damping_decrease: f64,
    pub damping_increase: f64,
    /// Finite-difference step of the Jacobian.
    pub step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tol: 1e-14,
            cost_tol: 1e-14,
            rmse_tol: 1e-6,
            gradient_accept: 1e-6,
            initial_damping: 1e-3,
            damping_decrease: 0.5,
            damping_increase: 4.0,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<C = Scene> {
    pub scene: C,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub gauge: GaugeChart,
    /// Half squared residual after each accepted step, starting with the initial value.
    pub cost_history: Vec<f64>,
}

/// Root-mean-square of the wrapped residuals over all `s n m` entries.
pub fn reprojection_rmse<C: Configuration>(config: &C, measurements: &Measurements) -> Result<f64> {
    let r = residuals(config, measurements)?;
    Ok((r.norm_squared() / r.len() as f64).sqrt())
}

/// Reconstructs a static scene from its image data, starting at `init`.
pub fn solve(measurements: &Measurements, init: &Scene, options: &SolveOptions) -> Result<SolveReport<Scene>> {
    let report = feasible(init.kind, init.points.len() as u64, init.cameras.len() as u64);
    if !report.feasible {
        return Err(Error::Infeasible(report));
    }
    init.validate()?;
    let start = to_origin(init)?;
    let gauge = gauge_fix(&start)?;
    solve_in_gauge(measurements, &start, gauge, options)
}

// Translates the scene so that its first point sits at the origin.
fn to_origin<C: Configuration>(config: &C) -> Result<C> {
    let p0 = config.point_coords(0);
    let shift = -DVector::from_column_slice(&p0[..config.kind().class().d]);
    GroupElement::translation(shift).act(config)
}

/// Reconstructs a moving-point scene observed at the known `times`.
pub fn solve_jet(
    measurements: &Measurements,
    times: &[f64],
    init: &JetScene,
    options: &SolveOptions,
) -> Result<SolveReport<JetScene>> {
    let class = init.kind.class();
    let counts = Counts {
        point_dim: init.point_dim() as i64,
        ..Counts::of(class)
    };
    let report = counts.evaluate(init.motion.len() as u64, init.cameras.len() as u64);
    if !report.feasible {
        return Err(Error::Infeasible(report));
    }
    let mut start = init.clone();
    start.times = times.to_vec();
    start.validate()?;
    let start = to_origin(&start)?;
    let gauge = gauge_fix(&start)?;
    solve_in_gauge(measurements, &start, gauge, options)
}

/// Levenberg-Marquardt over the free coordinates of a gauge chart.
pub fn solve_in_gauge<C: Configuration>(
    measurements: &Measurements,
    init: &C,
    gauge: GaugeChart,
    options: &SolveOptions,
) -> Result<SolveReport<C>> {
    if gauge.dim != init.dim() {
        return Err(Error::Shape("gauge chart does not match the scene".into()));
    }
    let free = gauge.free();
    let mut x = init.coords();
    for (&k, &v) in gauge.pinned.iter().zip(&gauge.values) {
        x[k] = v;
    }
    let mut config = init.with_coords(&x)?;
    let mut r = residuals(&config, measurements)?;
    let mut cost = 0.5 * r.norm_squared();
    let mut history = vec![cost];
    let mut lambda = options.initial_damping;
    let mut gradient_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut stopped = false;

    while iterations < options.max_iterations {
        let jac = jacobian_columns(&config, options.step, &free)?;
        let grad = jac.tr_mul(&r);
        gradient_norm = grad.norm();
        if gradient_norm < options.gradient_tol || cost == 0.0 {
            stopped = true;
            break;
        }
        iterations += 1;
        let normal = jac.tr_mul(&jac);
        let diag_floor = 1e-12 * normal.diagonal().max().max(1e-300);
        let mut accepted = None;
        while lambda < 1e16 {
            let mut damped = normal.clone();
            for k in 0..free.len() {
                damped[(k, k)] += lambda * normal[(k, k)].max(diag_floor);
            }
            let Some(delta) = solve_spd(damped, &(-&grad)) else {
                lambda *= options.damping_increase;
                continue;
            };
            let mut trial = x.clone();
            for (c, &k) in free.iter().enumerate() {
                trial[k] += delta[c];
            }
            let candidate = config.with_coords(&trial).and_then(|c| {
                let rr = residuals(&c, measurements)?;
                Ok((c, rr))
            });
            match candidate {
                Ok((c, rr)) if 0.5 * rr.norm_squared() < cost => {
                    accepted = Some((trial, c, rr));
                    lambda *= options.damping_decrease;
                    break;
                }
                _ => lambda *= options.damping_increase,
            }
        }
        let Some((trial, c, rr)) = accepted else {
            // no descent step left at any damping
            stopped = true;
            break;
        };
        let new_cost = 0.5 * rr.norm_squared();
        let decrease = (cost - new_cost) / cost;
        x = trial;
        config = c;
        r = rr;
        cost = new_cost;
        history.push(cost);
        if decrease < options.cost_tol {
            stopped = true;
            break;
        }
    }
    if stopped && gradient_norm.is_infinite() {
        gradient_norm = 0.0;
    }
    if iterations == options.max_iterations || !stopped {
        let jac = jacobian_columns(&config, options.step, &free)?;
        gradient_norm = jac.tr_mul(&r).norm();
    }
    let rmse = (r.norm_squared() / r.len() as f64).sqrt();
    let converged = stopped && rmse <= options.rmse_tol && gradient_norm <= options.gradient_accept;
    Ok(SolveReport {
        scene: config,
        rmse,
        iterations,
        converged,
        gradient_norm,
        gauge,
        cost_history: history,
    })
}

fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    a.lu().solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::CameraKind;
    use crate::sfm::synth::{perturb, random_scene};
    use crate::symmetry::{align, random_element};

    #[test]
    fn rmse_definition() {
        let scene = random_scene(CameraKind::AffineOrtho3d, 3, 3, 2).unwrap();
        let meas = scene.evaluate().unwrap();
        assert_eq!(reprojection_rmse(&scene, &meas).unwrap(), 0.0);

        let moved = random_element(crate::camera::GroupKind::Euclidean, 3, 5).act(&scene).unwrap();
        assert!(reprojection_rmse(&moved, &meas).unwrap() < 1e-12);

        let mut bumped = meas.clone();
        bumped.data[4].coords[1] += 1.0;
        let total = (2 * 3 * 3) as f64;
        let got = reprojection_rmse(&scene, &bumped).unwrap();
        assert!((got - 1.0 / total.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn infeasible_request_is_rejected() {
        let scene = random_scene(CameraKind::AffineOrtho2d, 5, 2, 0).unwrap();
        let meas = scene.evaluate().unwrap();
        match solve(&meas, &scene, &SolveOptions::default()) {
            Err(Error::Infeasible(r)) => assert!(!r.feasible),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oriented_omni_round_trip() {
        let truth = random_scene(CameraKind::OmniOriented2d, 3, 3, 4).unwrap();
        let meas = truth.evaluate().unwrap();
        let init = perturb(&truth, 0.1, 40).unwrap();
        let rep = solve(&meas, &init, &SolveOptions::default()).unwrap();
        assert!(rep.converged, "rmse {} grad {}", rep.rmse, rep.gradient_norm);
        let (_, err) = align(&rep.scene, &truth).unwrap();
        assert!(err < 1e-6, "align rmse {err}");
        assert!(rep.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }
}
