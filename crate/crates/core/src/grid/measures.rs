//! Projection, length and mixed measures of boundary components.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::gridset::{BoundaryComponent, GridSet};
use crate::grid::lattice::{CellRect, Edge, Lattice};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarMeasureConfig<T> {
    pub h_star: T,
}

impl<T: Scalar> StarMeasureConfig<T> {
    pub fn new(h_star: T) -> Result<Self> {
        if h_star > T::zero() && h_star < T::one() {
            Ok(Self { h_star })
        } else {
            Err(invalid("h_star must lie in (0, 1)"))
        }
    }

    /// Unchecked weight, allowing the degenerate endpoints 0 and 1.
    pub fn weight(h_star: T) -> Self {
        Self { h_star }
    }
}

impl<T: Scalar> Default for StarMeasureConfig<T> {
    fn default() -> Self {
        Self { h_star: T::lit(0.1) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Infty,
    Hausdorff,
    Star,
}

/// Numbers of lattice columns and rows covered by `π₁Γ` and `π₂Γ`.
pub fn projection_counts<T: Scalar>(lattice: &Lattice<T>, edges: &[usize]) -> (usize, usize) {
    let (nx, ny) = (lattice.nx, lattice.ny);
    let mut cols = vec![false; nx];
    let mut rows = vec![false; ny];
    for &e in edges {
        match Edge::from_id(e, nx, ny) {
            Edge::H { i, .. } => cols[i as usize] = true,
            Edge::V { j, .. } => rows[j as usize] = true,
        }
    }
    (cols.iter().filter(|&&b| b).count(), rows.iter().filter(|&&b| b).count())
}

/// `|Γ|_∞ = √(|π₁Γ|² + |π₂Γ|²)`.
pub fn measure_infty<T: Scalar>(lattice: &Lattice<T>, gamma: &[usize]) -> T {
    let (p1, p2) = projection_counts(lattice, gamma);
    let two_s = lattice.cell_side();
    T::from_count(p1 * p1 + p2 * p2).sqrt() * two_s
}

/// Total edge length.
pub fn measure_hausdorff<T: Scalar>(lattice: &Lattice<T>, edges: &[usize]) -> T {
    T::from_count(edges.len()) * lattice.cell_side()
}

/// `|Θ|_* = h_*|Θ|_H + (1 − h_*)|Γ|_∞`.
pub fn measure_star<T: Scalar>(lattice: &Lattice<T>, c: &BoundaryComponent, cfg: StarMeasureConfig<T>) -> T {
    cfg.h_star * measure_hausdorff(lattice, &c.theta) + (T::one() - cfg.h_star) * measure_infty(lattice, &c.gamma)
}

/// Sum of the per-component measure over interior components.
pub fn set_norm<T: Scalar>(w: &GridSet<T>, kind: NormKind, cfg: StarMeasureConfig<T>) -> T {
    let bcs = w.boundary_components();
    let mut sum = T::zero();
    for k in w.interior() {
        let c = &bcs[k];
        sum += match kind {
            NormKind::Infty => measure_infty(&w.lattice, &c.gamma),
            NormKind::Hausdorff => measure_hausdorff(&w.lattice, &c.theta),
            NormKind::Star => measure_star(&w.lattice, c, cfg),
        };
    }
    sum
}

/// `(|∂R|_H, |∂R|_∞)` of a rectangle of `a × b` cells.
pub fn rect_measures<T: Scalar>(lattice: &Lattice<T>, rect: &CellRect) -> (T, T) {
    let two_s = lattice.cell_side();
    let (a, b) = (rect.width(), rect.height());
    let h = T::from_count(2 * (a + b)) * two_s;
    let inf = T::from_count(a * a + b * b).sqrt() * two_s;
    (h, inf)
}

/// `(1/√2)|∂R|_H ≤ 2|∂R|_∞ ≤ |∂R|_H` for an `a × b` rectangle, decided in
/// integer arithmetic on the squared inequalities.
pub fn infty_rect_bounds_hold(a: u64, b: u64) -> bool {
    let h = 2 * (a + b);
    let inf_sq = a * a + b * b;
    // (1/√2)·h ≤ 2√inf_sq  ⇔  h² ≤ 8·inf_sq ;  2√inf_sq ≤ h  ⇔  4·inf_sq ≤ h².
    h * h <= 8 * inf_sq && 4 * inf_sq <= h * h
}

/// Length of edges between `cells` and the rest of `ambient`: edges with
/// both sides inside the ambient region and exactly one side in `cells`.
pub fn perimeter<T: Scalar>(lattice: &Lattice<T>, cells: &[bool], ambient: &[bool]) -> T {
    T::from_count(perimeter_edges(lattice.nx, lattice.ny, cells, ambient).len()) * lattice.cell_side()
}

/// Edge ids counted by [`perimeter`].
pub fn perimeter_edges(nx: usize, ny: usize, cells: &[bool], ambient: &[bool]) -> Vec<usize> {
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            if i + 1 < nx {
                let d = c + 1;
                if ambient[c] && ambient[d] && cells[c] != cells[d] {
                    out.push(Edge::V { i: (i + 1) as u32, j: j as u32 }.id(nx, ny));
                }
            }
            if j + 1 < ny {
                let d = c + nx;
                if ambient[c] && ambient[d] && cells[c] != cells[d] {
                    out.push(Edge::H { i: i as u32, j: (j + 1) as u32 }.id(nx, ny));
                }
            }
        }
    }
    out.sort_unstable();
    out
}
