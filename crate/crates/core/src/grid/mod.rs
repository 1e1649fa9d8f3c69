//! Lattice geometry, grid sets with labelled complement components, their
//! measures, and the set-modification calculus.

pub mod gridset;
pub mod json;
pub mod lattice;
pub mod measures;
pub mod modify;

pub use gridset::{connected_components, BoundaryComponent, Component, GridSet};
pub use lattice::{CellRect, Edge, Lattice, Side, SHIFTS};
pub use measures::{
    infty_rect_bounds_hold, measure_hausdorff, measure_infty, measure_star, perimeter, set_norm, NormKind,
    StarMeasureConfig,
};
pub use modify::{
    fill_holes, merge_small_components, rectangle_hull, rectangleize, subtract_and_mark, touching_pairs, MergeRule,
    Rectangleized,
};
