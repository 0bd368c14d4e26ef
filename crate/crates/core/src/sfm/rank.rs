use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::synth::random_scene;
use super::{jacobian, Configuration, DEFAULT_STEP};
use crate::camera::CameraKind;
use crate::error::{Error, Result};
use crate::symmetry::generators;

/// Relative singular-value cutoff used when none is given.
pub fn default_rel_tol(rows: usize, cols: usize) -> f64 {
    1e-8 * rows.max(cols) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub rel_tol: f64,
    /// Absolute cutoff `rel_tol * sigma_max`.
    pub cutoff: f64,
    /// Singular values, largest first.
    pub singular_values: Vec<f64>,
    /// `sigma_rank / sigma_{rank+1}` at the cut; `None` when there is no
    /// value on one side of it.
    pub gap: Option<f64>,
}

/// SVD-based numerical rank: number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(mat: &DMatrix<f64>, rel_tol: f64) -> Result<RankReport> {
    if mat.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let mut sv: Vec<f64> = mat.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cutoff = rel_tol * sv[0];
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let gap = if rank == 0 || rank == sv.len() {
        None
    } else if sv[rank] == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(sv[rank - 1] / sv[rank])
    };
    Ok(RankReport {
        rows: mat.nrows(),
        cols: mat.ncols(),
        rank,
        rel_tol,
        cutoff,
        singular_values: sv,
        gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericRank {
    pub class: CameraKind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Maximum rank over the trials.
    pub rank: usize,
    /// `min(dn + fm + h - g, s n m)`.
    pub prediction: usize,
    /// `prediction - rank`, zero when the prediction is met or exceeded.
    pub deficit: usize,
    pub trial_ranks: Vec<usize>,
    pub trial_gaps: Vec<Option<f64>>,
    /// Report of the first trial that reached the maximum rank.
    pub best: RankReport,
}

/// Rank of `DF` predicted by dimension counting.
pub fn predicted_rank(kind: CameraKind, n: usize, m: usize) -> usize {
    let c = kind.class();
    let quotient = (c.d * n + c.f * m + c.h).saturating_sub(c.g);
    quotient.min(c.s * n * m)
}

pub(crate) fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Generic rank of `DF` for a class at `(n, m)`: the maximum numerical rank
/// over `trials` seeded random scenes.
pub fn generic_rank(kind: CameraKind, n: usize, m: usize, trials: usize, seed: u64) -> Result<GenericRank> {
    generic_rank_tol(kind, n, m, trials, seed, None)
}

pub fn generic_rank_tol(
    kind: CameraKind,
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    rel_tol: Option<f64>,
) -> Result<GenericRank> {
    if trials == 0 || n == 0 || m == 0 {
        return Err(Error::InvalidArgument("trials, n and m must be at least 1".into()));
    }
    let reports: Vec<RankReport> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<RankReport> {
            let mut last = None;
            for attempt in 0..100u64 {
                let s = trial_seed(trial_seed(seed, t), attempt);
                let jac = match random_scene(kind, n, m, s).and_then(|sc| jacobian(&sc, DEFAULT_STEP)) {
                    Ok(j) => j,
                    Err(e @ (Error::Singular(_) | Error::SingularAt { .. })) => {
                        last = Some(e);
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let tol = rel_tol.unwrap_or_else(|| default_rel_tol(jac.nrows(), jac.ncols()));
                return numerical_rank(&jac, tol);
            }
            Err(last.unwrap_or_else(|| Error::Singular("no regular scene drawn".into())))
        })
        .collect::<Result<_>>()?;
    let rank = reports.iter().map(|r| r.rank).max().unwrap();
    let best = reports.iter().find(|r| r.rank == rank).unwrap().clone();
    let prediction = predicted_rank(kind, n, m);
    Ok(GenericRank {
        class: kind,
        n,
        m,
        seed,
        rank,
        prediction,
        deficit: prediction.saturating_sub(rank),
        trial_ranks: reports.iter().map(|r| r.rank).collect(),
        trial_gaps: reports.iter().map(|r| r.gap).collect(),
        best,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    /// `|DF v| / (|DF| |v|)` per direction.
    pub ratios: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

/// Checks that every symmetry generator lies in the kernel of `DF`.
pub fn kernel_check<C: Configuration>(config: &C, tol: f64) -> Result<KernelReport> {
    let gens = generators(config)?;
    kernel_check_directions(config, &gens, tol)
}

/// Checks that each column of `directions` lies in the kernel of `DF`.
pub fn kernel_check_directions<C: Configuration>(
    config: &C,
    directions: &DMatrix<f64>,
    tol: f64,
) -> Result<KernelReport> {
    let jac = jacobian(config, DEFAULT_STEP)?;
    if directions.nrows() != jac.ncols() {
        return Err(Error::Shape(format!(
            "directions have {} rows, the Jacobian {} columns",
            directions.nrows(),
            jac.ncols()
        )));
    }
    let norm = jac.clone().singular_values().max();
    let ratios: Vec<f64> = directions
        .column_iter()
        .map(|v| (&jac * v).norm() / (norm * v.norm()))
        .collect();
    let passed = ratios.iter().all(|&r| r <= tol);
    Ok(KernelReport { ratios, tol, passed })
}
