use nalgebra::DMatrix;

use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::sfm::{
    default_rel_tol, jacobian_columns, numerical_rank, Configuration, RankReport, DEFAULT_STEP,
};
use crate::symmetry::generators;

/// A slice through the symmetry orbits: `g` coordinates of the scene vector
/// held at fixed values, the rest free.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeChart {
    pub dim: usize,
    /// Pinned coordinate indices, in the order they were chosen.
    pub pinned: Vec<usize>,
    /// Values of the pinned coordinates.
    pub values: Vec<f64>,
}

impl GaugeChart {
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim];
        for &k in &self.pinned {
            mask[k] = true;
        }
        mask
    }

    pub fn free(&self) -> Vec<usize> {
        let mask = self.mask();
        (0..self.dim).filter(|&k| !mask[k]).collect()
    }
}

/// Candidate order used by [`gauge_fix`]: first point, then the first
/// camera's rotation block, then the coordinates of the second point in
/// decreasing distance from the first, then everything else.
pub fn default_priority<C: Configuration>(template: &C) -> Vec<usize> {
    let class = template.kind().class();
    let d = class.d;
    let pd = template.point_dim();
    let mut order: Vec<usize> = (0..d).collect();
    if class.group.has_rotation() {
        if let Some(r) = Camera::rotation_range(template.kind()) {
            let base = pd * template.n_points();
            order.extend(r.map(|k| base + k));
        }
    }
    if template.n_points() > 1 {
        let (p0, p1) = (template.point_coords(0), template.point_coords(1));
        let mut second: Vec<usize> = (0..d).collect();
        second.sort_by(|&a, &b| (p1[b] - p0[b]).abs().total_cmp(&(p1[a] - p0[a]).abs()));
        order.extend(second.into_iter().map(|k| pd + k));
    }
    for k in 0..template.dim() {
        if !order.contains(&k) {
            order.push(k);
        }
    }
    order
}

/// Pins `g` coordinates following [`default_priority`].
pub fn gauge_fix<C: Configuration>(template: &C) -> Result<GaugeChart> {
    gauge_fix_ordered(template, &default_priority(template))
}

/// Pins `g` coordinates, taking candidates greedily in the given order and
/// keeping one only if it is transverse to the orbit directions already cut.
pub fn gauge_fix_ordered<C: Configuration>(template: &C, candidates: &[usize]) -> Result<GaugeChart> {
    let gens = generators(template)?;
    let g = gens.ncols();
    let x = template.coords();
    let scale = gens.amax().max(1.0);
    let mut pinned: Vec<usize> = Vec::with_capacity(g);
    for &k in candidates {
        if pinned.len() == g {
            break;
        }
        if k >= x.len() || pinned.contains(&k) {
            continue;
        }
        let mut rows: Vec<usize> = pinned.clone();
        rows.push(k);
        let sub = DMatrix::from_fn(rows.len(), g, |r, c| gens[(rows[r], c)]);
        let sv = sub.singular_values();
        let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest > 1e-6 * scale {
            pinned.push(k);
        }
    }
    if pinned.len() < g {
        return Err(Error::Degenerate(format!(
            "only {} of {} gauge coordinates could be pinned",
            pinned.len(),
            g
        )));
    }
    let values = pinned.iter().map(|&k| x[k]).collect();
    Ok(GaugeChart { dim: x.len(), pinned, values })
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// Free coordinates: `dim - g`.
    pub expected: usize,
    pub rank: RankReport,
    pub passed: bool,
}

/// Local uniqueness modulo the gauge: the gauge-fixed Jacobian must have full
/// column rank.
pub fn local_uniqueness<C: Configuration>(
    config: &C,
    gauge: &GaugeChart,
    rel_tol: Option<f64>,
) -> Result<UniquenessReport> {
    let free = gauge.free();
    let jac = jacobian_columns(config, DEFAULT_STEP, &free)?;
    let tol = rel_tol.unwrap_or_else(|| default_rel_tol(jac.nrows(), jac.ncols()));
    let rank = numerical_rank(&jac, tol)?;
    let passed = rank.rank == free.len();
    Ok(UniquenessReport { expected: free.len(), rank, passed })
}
