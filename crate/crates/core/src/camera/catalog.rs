use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Focal length used by the `perspective-known-*` classes.
pub const KNOWN_FOCAL: f64 = 1.0;

/// Point-camera symmetry group of a camera class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    /// Translations and rotations.
    Euclidean,
    /// Translations and scalings.
    Dilation,
    /// Translations, rotations and scalings.
    Similarity,
}

impl GroupKind {
    pub fn has_rotation(self) -> bool {
        !matches!(self, GroupKind::Dilation)
    }

    pub fn has_scale(self) -> bool {
        !matches!(self, GroupKind::Euclidean)
    }

    /// Dimension of the group acting on d-dimensional space.
    pub fn dim(self, d: usize) -> usize {
        let rot = if self.has_rotation() { d * (d - 1) / 2 } else { 0 };
        d + rot + usize::from(self.has_scale())
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Euclidean => "euclidean",
            GroupKind::Dilation => "dilation",
            GroupKind::Similarity => "similarity",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CameraKind {
    AffineOrtho2d,
    OmniOriented2d,
    Omni2d,
    Perspective2d,
    PerspectiveKnown2d,
    PerspectiveZoom2d,
    AffineOrtho3d,
    OmniOriented3d,
    Omni3d,
    Perspective3d,
    PerspectiveKnown3d,
    PerspectiveZoom3d,
    Line3d,
}

/// Broad projection family, shared between the 2D and 3D variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    AffineOrtho,
    OmniOriented,
    Omni,
    /// Focal length stored in the scene globals.
    Perspective,
    /// Focal length fixed to [`KNOWN_FOCAL`].
    PerspectiveKnown,
    /// Focal length stored per camera.
    PerspectiveZoom,
    Line,
}

/// One row of the camera catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CameraClass {
    pub kind: CameraKind,
    pub name: &'static str,
    /// Ambient dimension.
    pub d: usize,
    /// Retinal dimension.
    pub s: usize,
    /// Per-camera parameter count.
    pub f: usize,
    /// Symmetry group dimension.
    pub g: usize,
    /// Scene-level shared parameter count.
    pub h: usize,
    pub group: GroupKind,
    pub chart_doc: &'static str,
}

macro_rules! class {
    ($kind:ident, $name:literal, $d:literal, $s:literal, $f:literal, $g:literal, $h:literal, $group:ident, $doc:literal) => {
        CameraClass {
            kind: CameraKind::$kind,
            name: $name,
            d: $d,
            s: $s,
            f: $f,
            g: $g,
            h: $h,
            group: GroupKind::$group,
            chart_doc: $doc,
        }
    };
}

static CATALOG: [CameraClass; 13] = [
    class!(AffineOrtho2d, "affine-ortho-2d", 2, 1, 2, 3, 0, Euclidean,
        "[angle, retinal offset]; image = (R^T P)_0 + offset"),
    class!(OmniOriented2d, "omni-oriented-2d", 2, 1, 2, 3, 0, Dilation,
        "[cx, cy]; image = bearing angle of P - C"),
    class!(Omni2d, "omni-2d", 2, 1, 3, 4, 0, Similarity,
        "[cx, cy, angle]; image = bearing angle of P - C minus camera angle"),
    class!(Perspective2d, "perspective-2d", 2, 1, 3, 3, 1, Euclidean,
        "[cx, cy, angle], globals [focal]; image = focal * q_0 / q_1"),
    class!(PerspectiveZoom2d, "perspective-zoom-2d", 2, 1, 4, 4, 0, Similarity,
        "[cx, cy, angle, focal]; image = focal * q_0 / q_1"),
    class!(AffineOrtho3d, "affine-ortho-3d", 3, 2, 5, 6, 0, Euclidean,
        "[w0, w1, w2, t0, t1]; image = (R^T P)_{0,1} + t"),
    class!(OmniOriented3d, "omni-oriented-3d", 3, 2, 3, 4, 0, Dilation,
        "[cx, cy, cz]; image = (azimuth, elevation) of P - C"),
    class!(Omni3d, "omni-3d", 3, 2, 6, 7, 0, Similarity,
        "[cx, cy, cz, w0, w1, w2]; image = (azimuth, elevation) of R^T (P - C)"),
    class!(Perspective3d, "perspective-3d", 3, 2, 6, 6, 1, Euclidean,
        "[cx, cy, cz, w0, w1, w2], globals [focal]; image = focal * q_{0,1} / q_2"),
    class!(PerspectiveZoom3d, "perspective-zoom-3d", 3, 2, 7, 7, 0, Similarity,
        "[cx, cy, cz, w0, w1, w2, focal]; image = focal * q_{0,1} / q_2"),
    class!(Line3d, "line-3d", 3, 1, 3, 6, 0, Euclidean,
        "[polar, azimuth, offset]; image = u . P - offset"),
    class!(PerspectiveKnown2d, "perspective-known-2d", 2, 1, 3, 3, 0, Euclidean,
        "[cx, cy, angle]; image = q_0 / q_1 (unit focal)"),
    class!(PerspectiveKnown3d, "perspective-known-3d", 3, 2, 6, 6, 0, Euclidean,
        "[cx, cy, cz, w0, w1, w2]; image = q_{0,1} / q_2 (unit focal)"),
];

/// All implemented camera classes.
pub fn catalog() -> &'static [CameraClass] {
    &CATALOG
}

/// Looks a class up by its catalog name.
pub fn lookup(name: &str) -> Result<&'static CameraClass> {
    CATALOG
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownClass(name.to_string()))
}

impl CameraKind {
    pub fn class(self) -> &'static CameraClass {
        CATALOG
            .iter()
            .find(|c| c.kind == self)
            .expect("every kind has a catalog row")
    }

    pub fn name(self) -> &'static str {
        self.class().name
    }

    pub fn family(self) -> Family {
        use CameraKind::*;
        match self {
            AffineOrtho2d | AffineOrtho3d => Family::AffineOrtho,
            OmniOriented2d | OmniOriented3d => Family::OmniOriented,
            Omni2d | Omni3d => Family::Omni,
            Perspective2d | Perspective3d => Family::Perspective,
            PerspectiveKnown2d | PerspectiveKnown3d => Family::PerspectiveKnown,
            PerspectiveZoom2d | PerspectiveZoom3d => Family::PerspectiveZoom,
            Line3d => Family::Line,
        }
    }

    /// Whether the retinal chart is made of angles.
    pub fn angular(self) -> bool {
        matches!(self.family(), Family::OmniOriented | Family::Omni)
    }
}

impl FromStr for CameraKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        lookup(s).map(|c| c.kind)
    }
}

impl fmt::Display for CameraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for CameraKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CameraKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}
