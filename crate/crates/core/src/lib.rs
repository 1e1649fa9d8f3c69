//! Piecewise rigidity decomposition of cracked two-dimensional deformation
//! fields on square grids.
//!
//! A field is split into a partition of the domain, one rigid motion per
//! piece, and a small displacement, by a multiscale procedure: carve cells
//! with concentrated elastic energy, fit local rotations and rigid motions,
//! heal small cracks by blending those motions, then read off the pieces.
//!
//! The numeric kernels (`linalg`, `grid`, `fields`, `local`) are generic over
//! [`Scalar`] (`f32` or `f64`). The pipeline layers (`engine`, `partition`,
//! `harness`) work in `f64`; see the aliases below.

pub mod engine;
pub mod error;
pub mod fields;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod local;
pub mod partition;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{tree_sum, Scalar};

pub type Vec2 = linalg::Vec2<f64>;
pub type Mat2 = linalg::Mat2<f64>;
pub type Lattice = grid::Lattice<f64>;
pub type GridSet = grid::GridSet<f64>;
pub type DeformationField = fields::DeformationField<f64>;
pub type RigidMotion = local::RigidMotion<f64>;
