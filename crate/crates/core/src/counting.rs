//! Integer dimension counting: the necessary condition
//! `d n + f m + h <= s n m + g` and its moving-point variant.

use std::fmt;

use serde::Serialize;

use crate::camera::{CameraClass, CameraKind};

/// One evaluation of the dimension inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub n: u64,
    pub m: u64,
    /// Unknowns: `d n + f m + h`.
    pub lhs: i64,
    /// Data plus symmetry: `s n m + g`.
    pub rhs: i64,
    pub slack: i64,
    pub feasible: bool,
    pub borderline: bool,
}

impl FeasibilityReport {
    fn new(n: u64, m: u64, lhs: i64, rhs: i64) -> Self {
        let slack = rhs - lhs;
        Self { n, m, lhs, rhs, slack, feasible: slack >= 0, borderline: slack == 0 }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} m={}: {} unknowns vs {} data + symmetry (slack {})",
            self.n, self.m, self.lhs, self.rhs, self.slack
        )
    }
}

/// Integer coefficients of an inequality `point_dim n + f m + h <= s n m + g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub point_dim: i64,
    pub f: i64,
    pub g: i64,
    pub h: i64,
    pub s: i64,
}

impl Counts {
    pub fn of(class: &CameraClass) -> Self {
        Self {
            point_dim: class.d as i64,
            f: class.f as i64,
            g: class.g as i64,
            h: class.h as i64,
            s: class.s as i64,
        }
    }

    /// Points moving on circles, seen by planar cameras with `(f, g) = (3, 4)`.
    pub const CIRCLE_PRESET: Counts = Counts { point_dim: 4, f: 3, g: 4, h: 0, s: 1 };

    pub fn evaluate(&self, n: u64, m: u64) -> FeasibilityReport {
        let (ni, mi) = (n as i64, m as i64);
        let lhs = self.point_dim * ni + self.f * mi + self.h;
        let rhs = self.s * ni * mi + self.g;
        FeasibilityReport::new(n, m, lhs, rhs)
    }

    /// Smallest `n >= 1` satisfying the inequality for `m` cameras.
    pub fn min_points(&self, m: u64) -> Option<u64> {
        // slack = (s m - point_dim) n + (g - f m - h)
        let mi = m as i64;
        min_positive(self.s * mi - self.point_dim, self.g - self.f * mi - self.h)
    }

    /// Smallest `m >= 1` satisfying the inequality for `n` points.
    pub fn min_cameras(&self, n: u64) -> Option<u64> {
        // slack = (s n - f) m + (g - point_dim n - h)
        let ni = n as i64;
        min_positive(self.s * ni - self.f, self.g - self.point_dim * ni - self.h)
    }
}

/// Smallest `x >= 1` with `a x + b >= 0`, if any.
fn min_positive(a: i64, b: i64) -> Option<u64> {
    if a > 0 {
        // x >= -b / a, rounded up
        let need = if b >= 0 { 0 } else { (-b + a - 1) / a };
        Some(need.max(1) as u64)
    } else if a + b >= 0 {
        Some(1)
    } else {
        None
    }
}

pub fn feasible(kind: CameraKind, n: u64, m: u64) -> FeasibilityReport {
    Counts::of(kind.class()).evaluate(n, m)
}

pub fn min_points(kind: CameraKind, m: u64) -> Option<u64> {
    Counts::of(kind.class()).min_points(m)
}

pub fn min_cameras(kind: CameraKind, n: u64) -> Option<u64> {
    Counts::of(kind.class()).min_cameras(n)
}

/// Reports for every `(n, m)` in `1..=n_max x 1..=m_max`, `n` outer.
pub fn forbidden_region(kind: CameraKind, n_max: u64, m_max: u64) -> Vec<FeasibilityReport> {
    let counts = Counts::of(kind.class());
    (1..=n_max)
        .flat_map(|n| (1..=m_max).map(move |m| counts.evaluate(n, m)))
        .collect()
}

/// Moving-point inequality `point_dim n + f m + h <= s n m + g`, where
/// `point_dim = d (k + 1)` for order-k Taylor motion and 4 for circles.
pub fn jet_feasible(point_dim: u64, f: u64, g: u64, h: u64, s: u64, n: u64, m: u64) -> FeasibilityReport {
    Counts {
        point_dim: point_dim as i64,
        f: f as i64,
        g: g as i64,
        h: h as i64,
        s: s as i64,
    }
    .evaluate(n, m)
}

/// Slack of the inequality rewritten with one point pinned at the origin:
/// `d (n-1) + (f - (d-1)) m + h <= (d-1)(n-1) m + (g - d)`. Only meaningful
/// for hypersurface retinas (`s = d - 1`).
pub fn pinned_origin_slack(class: &CameraClass, n: u64, m: u64) -> i64 {
    let (d, f, g, h) = (class.d as i64, class.f as i64, class.g as i64, class.h as i64);
    let (n, m) = (n as i64, m as i64);
    let lhs = d * (n - 1) + (f - (d - 1)) * m + h;
    let rhs = (d - 1) * (n - 1) * m + (g - d);
    rhs - lhs
}

/// A published minimal point count that the inequality does not reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableDiscrepancy {
    pub class: CameraKind,
    pub m: u64,
    pub computed: Option<u64>,
    pub published: Option<u64>,
}

/// Published minimal point counts for `m = 2, 3, 4` cameras, per class.
/// `m = 2` uses the shared-focal `perspective-*` classes; `m = 3, 4` use the
/// known-focal classes.
pub const PUBLISHED_MIN_POINTS: &[(CameraKind, u64, Option<u64>)] = {
    use CameraKind::*;
    &[
        (AffineOrtho2d, 2, None),
        (OmniOriented2d, 2, None),
        (Omni2d, 2, None),
        (Perspective2d, 2, None),
        (PerspectiveZoom2d, 2, None),
        (AffineOrtho3d, 2, Some(4)),
        (OmniOriented3d, 2, Some(2)),
        (Omni3d, 2, Some(5)),
        (Perspective3d, 2, Some(7)),
        (PerspectiveZoom3d, 2, Some(8)),
        (AffineOrtho2d, 3, Some(3)),
        (OmniOriented2d, 3, Some(3)),
        (Omni2d, 3, Some(5)),
        (PerspectiveKnown2d, 3, Some(6)),
        (PerspectiveZoom2d, 3, Some(8)),
        (AffineOrtho3d, 3, Some(3)),
        (OmniOriented3d, 3, Some(2)),
        (Omni3d, 3, Some(4)),
        (PerspectiveKnown3d, 3, Some(4)),
        (PerspectiveZoom3d, 3, Some(5)),
        (AffineOrtho2d, 4, Some(3)),
        (OmniOriented2d, 4, Some(3)),
        (Omni2d, 4, Some(4)),
        (PerspectiveKnown2d, 4, Some(5)),
        (PerspectiveZoom2d, 4, Some(7)),
        (AffineOrtho3d, 4, Some(3)),
        (OmniOriented3d, 4, Some(2)),
        (Omni3d, 4, Some(4)),
        (PerspectiveKnown3d, 4, Some(4)),
        (PerspectiveZoom3d, 4, Some(5)),
    ]
};

/// Published values that disagree with [`min_points`].
pub fn table_discrepancies() -> Vec<TableDiscrepancy> {
    PUBLISHED_MIN_POINTS
        .iter()
        .filter_map(|&(class, m, published)| {
            let computed = min_points(class, m);
            (computed != published).then_some(TableDiscrepancy { class, m, computed, published })
        })
        .collect()
}
