//! Nonlinear and linearized motion models sharing one engine.

use crate::error::{Error, Result};
use crate::fields::DeformationField;
use crate::linalg::{dist_sq_to_so2, Mat2, Vec2};
use crate::local::fit::sum_mat;
use crate::local::{fit_points, project_points, InfinitesimalRigidMotion, RigidMotion};
use serde::{Deserialize, Serialize};

/// Portable motion record `x ↦ R x + c` (for the linear model `R = A`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionRecord {
    #[serde(rename = "R")]
    pub r: [[f64; 2]; 2],
    pub c: [f64; 2],
}

pub trait MotionModel: Sync {
    type Motion: Copy + Send + Sync + std::fmt::Debug;

    fn name(&self) -> &'static str;

    /// Bulk energy density of a cell gradient.
    fn density(&self, grad: Mat2<f64>) -> f64;

    /// Constant matrix field fitted on the cells: a rotation, or a skew matrix.
    fn coarse(&self, f: &DeformationField<f64>, cells: &[usize]) -> Result<Mat2<f64>>;

    /// Local motion on the cells given the coarse fit of a nearby cell.
    fn local(&self, f: &DeformationField<f64>, cells: &[usize], coarse: Mat2<f64>) -> Self::Motion;

    fn apply(&self, m: &Self::Motion, x: Vec2<f64>) -> Vec2<f64>;

    /// Global least-squares motion on the cells.
    fn fit(&self, f: &DeformationField<f64>, cells: &[usize]) -> Result<Self::Motion>;

    fn identity(&self) -> Self::Motion;

    /// Frame `R` in `e(Rᵀ∇u)`: the rotation, or `Id` for the linear model.
    fn frame(&self, m: &Self::Motion) -> Mat2<f64>;

    fn record(&self, m: &Self::Motion) -> MotionRecord;

    /// Whether per-piece rotation chains are meaningful for this model.
    fn chains(&self) -> bool;
}

fn mat_record(r: Mat2<f64>, c: Vec2<f64>) -> MotionRecord {
    MotionRecord { r: [[r.a, r.b], [r.c, r.d]], c: [c.x, c.y] }
}

/// Corner samples `(x, y(x))` of the active listed cells.
pub fn cell_samples(f: &DeformationField<f64>, cells: &[usize]) -> Vec<(Vec2<f64>, Vec2<f64>)> {
    let mut out = Vec::with_capacity(4 * cells.len());
    for &c in cells {
        if f.active[c] {
            let xs = f.corner_positions(c);
            for s in 0..4 {
                out.push((xs[s], f.corners[c][s]));
            }
        }
    }
    out
}

fn summed_gradient(f: &DeformationField<f64>, cells: &[usize]) -> Result<Mat2<f64>> {
    let grads: Vec<Mat2<f64>> = cells.iter().filter_map(|&c| f.gradient(c)).collect();
    if grads.is_empty() {
        return Err(Error::EmptyFit("region has no gradient cells".into()));
    }
    Ok(sum_mat(&grads).scale(1.0 / grads.len() as f64))
}

/// Deformations `y` with `dist²(∇y, SO(2))` and rigid motions.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rigid;

impl MotionModel for Rigid {
    type Motion = RigidMotion<f64>;

    fn name(&self) -> &'static str {
        "rigid"
    }

    fn density(&self, grad: Mat2<f64>) -> f64 {
        dist_sq_to_so2(grad).unwrap_or(0.0)
    }

    fn coarse(&self, f: &DeformationField<f64>, cells: &[usize]) -> Result<Mat2<f64>> {
        Ok(summed_gradient(f, cells)?.nearest_rotation())
    }

    /// Project `R̂ᵀy − x` onto infinitesimal motions `(A, c)`, then round
    /// `R̂(Id + A)x + R̂c` to a rigid motion.
    fn local(&self, f: &DeformationField<f64>, cells: &[usize], coarse: Mat2<f64>) -> RigidMotion<f64> {
        let rt = coarse.transpose();
        let pts: Vec<_> = cell_samples(f, cells).into_iter().map(|(x, y)| (x, rt * y - x)).collect();
        project_points(&pts).round_to_rigid(coarse)
    }

    fn apply(&self, m: &RigidMotion<f64>, x: Vec2<f64>) -> Vec2<f64> {
        m.apply(x)
    }

    fn fit(&self, f: &DeformationField<f64>, cells: &[usize]) -> Result<RigidMotion<f64>> {
        fit_points(&cell_samples(f, cells))
    }

    fn identity(&self) -> RigidMotion<f64> {
        RigidMotion::identity()
    }

    fn frame(&self, m: &RigidMotion<f64>) -> Mat2<f64> {
        m.r
    }

    fn record(&self, m: &RigidMotion<f64>) -> MotionRecord {
        mat_record(m.r, m.c)
    }

    fn chains(&self) -> bool {
        true
    }
}

/// Displacements `u` with `|e(∇u)|²` and infinitesimal rigid motions.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linear;

impl MotionModel for Linear {
    type Motion = InfinitesimalRigidMotion<f64>;

    fn name(&self) -> &'static str {
        "linear"
    }

    fn density(&self, grad: Mat2<f64>) -> f64 {
        grad.sym().norm_sq()
    }

    fn coarse(&self, f: &DeformationField<f64>, cells: &[usize]) -> Result<Mat2<f64>> {
        Ok(Mat2::skew(summed_gradient(f, cells)?.skew_part()))
    }

    fn local(&self, f: &DeformationField<f64>, cells: &[usize], _coarse: Mat2<f64>) -> InfinitesimalRigidMotion<f64> {
        project_points(&cell_samples(f, cells))
    }

    fn apply(&self, m: &InfinitesimalRigidMotion<f64>, x: Vec2<f64>) -> Vec2<f64> {
        m.apply(x)
    }

    fn fit(&self, f: &DeformationField<f64>, cells: &[usize]) -> Result<InfinitesimalRigidMotion<f64>> {
        let pts = cell_samples(f, cells);
        if pts.is_empty() {
            return Err(Error::EmptyFit("region has no sample points".into()));
        }
        Ok(project_points(&pts))
    }

    fn identity(&self) -> InfinitesimalRigidMotion<f64> {
        InfinitesimalRigidMotion::zero()
    }

    fn frame(&self, _m: &InfinitesimalRigidMotion<f64>) -> Mat2<f64> {
        Mat2::identity()
    }

    fn record(&self, m: &InfinitesimalRigidMotion<f64>) -> MotionRecord {
        mat_record(m.matrix(), m.c)
    }

    fn chains(&self) -> bool {
        false
    }
}
