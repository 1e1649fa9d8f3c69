//! `L²` projection onto infinitesimal rigid motions.

use crate::fields::DeformationField;
use crate::linalg::Vec2;
use crate::local::fit::{mean, sample_weight, samples};
use crate::local::motion::InfinitesimalRigidMotion;
use crate::scalar::{tree_sum, Scalar};

/// Projection of point data `(x, u(x))` with equal weights.
///
/// On centred coordinates the basis `e₁, e₂, (x − x̄)^⊥` is orthogonal, so
/// `Pu = ū + b·(x − x̄)^⊥` with `b = Σ u·(x − x̄)^⊥ / Σ |x − x̄|²`.
pub fn project_points<T: Scalar>(pts: &[(Vec2<T>, Vec2<T>)]) -> InfinitesimalRigidMotion<T> {
    if pts.is_empty() {
        return InfinitesimalRigidMotion::zero();
    }
    let xbar = mean(pts.iter().map(|p| p.0));
    let ubar = mean(pts.iter().map(|p| p.1));
    let num: Vec<T> = pts.iter().map(|(x, u)| u.dot((*x - xbar).perp())).collect();
    let den: Vec<T> = pts.iter().map(|(x, _)| (*x - xbar).norm_sq()).collect();
    let den = tree_sum(&den);
    let b = if den > T::zero() { tree_sum(&num) / den } else { T::zero() };
    // b·v^⊥ = A v with A = [[0, −b], [b, 0]], i.e. a = −b.
    InfinitesimalRigidMotion { a: -b, c: ubar - xbar.perp().scale(b) }
}

pub fn project_infinitesimal_rigid<T: Scalar>(u: &DeformationField<T>, region: &[bool]) -> InfinitesimalRigidMotion<T> {
    project_points(&samples(u, region))
}

/// Corner-rule inner product `⟨u, v⟩_{L²(region)}` of two fields.
pub fn inner<T: Scalar>(u: &DeformationField<T>, v: &DeformationField<T>, region: &[bool]) -> T {
    let w = sample_weight(u.h());
    let vals: Vec<T> = (0..u.cell_count())
        .filter(|&c| region[c] && u.active[c])
        .flat_map(|c| (0..4).map(move |s| u.corners[c][s].dot(v.corners[c][s]) * w))
        .collect();
    tree_sum(&vals)
}

/// `‖u − (A x + c)‖²_{L²(region)}`.
pub fn projection_residual<T: Scalar>(
    u: &DeformationField<T>,
    region: &[bool],
    p: &InfinitesimalRigidMotion<T>,
) -> T {
    let w = sample_weight(u.h());
    let vals: Vec<T> = samples(u, region).into_iter().map(|(x, y)| (y - p.apply(x)).norm_sq() * w).collect();
    tree_sum(&vals)
}

/// The field `x ↦ A x + c` on `u`'s lattice and mask.
pub fn evaluate<T: Scalar>(u: &DeformationField<T>, p: &InfinitesimalRigidMotion<T>) -> DeformationField<T> {
    u.map_values(|x, _| p.apply(x))
}
