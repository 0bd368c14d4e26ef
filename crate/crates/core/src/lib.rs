//! Structure-from-motion dimension counting and its numerical verification.
//!
//! The crate provides a catalog of camera classes with their parameter and
//! symmetry dimensions, the map `F` sending a scene (points, cameras, shared
//! parameters) to its image data, finite-difference Jacobians with SVD rank
//! analysis, the integer dimension inequality, and a Levenberg-Marquardt
//! reconstruction in a gauge that removes the symmetry group.

pub mod camera;
pub mod counting;
mod error;
pub mod reconstruct;
pub mod rotation;
pub mod sfm;
pub mod symmetry;

pub use camera::{catalog, lookup, Camera, CameraClass, CameraKind, GroupKind, RetinalPoint};
pub use counting::{feasible, FeasibilityReport};
pub use error::{Error, Result};
pub use sfm::{Configuration, JetScene, Measurements, MotionModel, Scene};
pub use symmetry::GroupElement;
