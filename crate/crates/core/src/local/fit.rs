//! Best-fit rotations and rigid motions on cell regions.
//!
//! `L²` quantities use the corner rule: each active cell contributes its four
//! corner values with weight `h²/4` (exact for bilinear integrands of degree
//! one in each variable, and the natural quadrature for cell-local data).

use crate::error::{Error, Result};
use crate::fields::DeformationField;
use crate::linalg::{Mat2, Vec2};
use crate::local::motion::RigidMotion;
use crate::scalar::{tree_sum, Scalar};

/// Corner sample points `(x, y(x))` of the active cells in `region`.
pub fn samples<T: Scalar>(f: &DeformationField<T>, region: &[bool]) -> Vec<(Vec2<T>, Vec2<T>)> {
    let mut out = Vec::new();
    for c in 0..f.cell_count() {
        if region[c] && f.active[c] {
            let xs = f.corner_positions(c);
            for s in 0..4 {
                out.push((xs[s], f.corners[c][s]));
            }
        }
    }
    out
}

/// Quadrature weight of one corner sample.
#[inline]
pub fn sample_weight<T: Scalar>(h: T) -> T {
    h * h * T::lit(0.25)
}

pub(crate) fn mean<T: Scalar>(v: impl Iterator<Item = Vec2<T>>) -> Vec2<T> {
    let (xs, ys): (Vec<T>, Vec<T>) = v.map(|p| (p.x, p.y)).unzip();
    let n = T::from_count(xs.len().max(1));
    Vec2::new(tree_sum(&xs) / n, tree_sum(&ys) / n)
}

pub(crate) fn sum_mat<T: Scalar>(m: &[Mat2<T>]) -> Mat2<T> {
    let pick = |k: fn(&Mat2<T>) -> T| tree_sum(&m.iter().map(k).collect::<Vec<_>>());
    Mat2::new(pick(|m| m.a), pick(|m| m.b), pick(|m| m.c), pick(|m| m.d))
}

/// `argmin_R Σ_cells |∇y − R|² h²`: the polar rotation of `Σ ∇y`.
pub fn best_fit_rotation<T: Scalar>(f: &DeformationField<T>, region: &[bool]) -> Result<RigidMotion<T>> {
    let grads: Vec<Mat2<T>> = (0..f.cell_count()).filter(|&c| region[c]).filter_map(|c| f.gradient(c)).collect();
    if grads.is_empty() {
        return Err(Error::EmptyFit("region has no gradient cells".into()));
    }
    Ok(RigidMotion { r: sum_mat(&grads).nearest_rotation(), c: Vec2::zero() })
}

/// `(R, c)` minimizing `Σ |y − (R x + c)|²` over the corner samples: centred
/// Procrustes on the cross-covariance `Σ (y − ȳ)(x − x̄)ᵀ`.
pub fn best_fit_rigid_motion<T: Scalar>(f: &DeformationField<T>, region: &[bool]) -> Result<RigidMotion<T>> {
    let pts = samples(f, region);
    fit_points(&pts)
}

/// Procrustes fit on explicit point pairs.
pub fn fit_points<T: Scalar>(pts: &[(Vec2<T>, Vec2<T>)]) -> Result<RigidMotion<T>> {
    if pts.is_empty() {
        return Err(Error::EmptyFit("region has no sample points".into()));
    }
    let xbar = mean(pts.iter().map(|p| p.0));
    let ybar = mean(pts.iter().map(|p| p.1));
    if pts.len() == 1 {
        return Ok(RigidMotion { r: Mat2::identity(), c: ybar - xbar });
    }
    let cross: Vec<Mat2<T>> = pts.iter().map(|(x, y)| (*y - ybar).outer(*x - xbar)).collect();
    let r = sum_mat(&cross).nearest_rotation();
    Ok(RigidMotion { r, c: ybar - r * xbar })
}

/// `‖y − (R x + c)‖²_{L²(region)}`.
pub fn motion_residual<T: Scalar>(f: &DeformationField<T>, region: &[bool], m: &RigidMotion<T>) -> T {
    let w = sample_weight(f.h());
    let vals: Vec<T> = samples(f, region).into_iter().map(|(x, y)| (y - m.apply(x)).norm_sq() * w).collect();
    tree_sum(&vals)
}

/// `‖∇y − R‖²_{L²(region)}`.
pub fn rotation_residual<T: Scalar>(f: &DeformationField<T>, region: &[bool], r: Mat2<T>) -> T {
    let h2 = f.h() * f.h();
    let vals: Vec<T> = (0..f.cell_count())
        .filter(|&c| region[c])
        .filter_map(|c| f.gradient(c))
        .map(|g| (g - r).norm_sq() * h2)
        .collect();
    tree_sum(&vals)
}
