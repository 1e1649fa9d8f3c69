//! Rigidity fits on grid regions: rotations, rigid motions, the infinitesimal
//! rigid projection, harmonic splitting, and chained rotation fields.

pub mod chain;
pub mod fit;
pub mod harmonic;
pub mod motion;
pub mod projection;

pub use chain::{
    affine_growth, chain_rotation_field, rigid_chain_propagate, ChainComponent, ChainPropagation, SquareFit,
    SquareLink, SquareTiling,
};
pub use fit::{best_fit_rigid_motion, best_fit_rotation, fit_points, motion_residual, rotation_residual, samples};
pub use harmonic::{harmonic_split, HarmonicSplit};
pub use motion::{InfinitesimalRigidMotion, RigidMotion};
pub use projection::{evaluate, inner, project_infinitesimal_rigid, project_points, projection_residual};
