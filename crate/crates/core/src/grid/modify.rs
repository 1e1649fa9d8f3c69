//! Set-modification calculus: hole filling, subtraction with boundary
//! marking, merging of touching small components, and replacement of
//! components by rectangles.

use crate::error::{Error, Result};
use crate::grid::gridset::{connected_components, Component, GridSet};
use crate::grid::lattice::CellRect;
use crate::grid::measures::{self, NormKind, StarMeasureConfig};
use crate::scalar::Scalar;

/// Put interior components first, keeping the relative order of `order`.
fn interior_first<T: Scalar>(set: &GridSet<T>, order: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let order: Vec<usize> = order.into_iter().collect();
    let (mut a, b): (Vec<usize>, Vec<usize>) =
        order.into_iter().partition(|&k| !set.components[k].touches_boundary);
    a.extend(b);
    a
}

fn build<T: Scalar>(
    template: &GridSet<T>,
    mask: Vec<bool>,
    comps: Vec<Vec<usize>>,
    order: Vec<usize>,
) -> GridSet<T> {
    let lat = template.lattice;
    let components = comps
        .into_iter()
        .map(|cells| {
            let touches_boundary = cells.iter().any(|&c| lat.on_ring(c));
            Component { cells, touches_boundary }
        })
        .collect();
    let mut set = GridSet::unordered(lat, mask, components);
    set.ordering = interior_first(&set, order);
    set
}

/// `H^λ(W)`: absorb every interior component with `|Γ|_∞ ≤ λ` into the set.
/// `None` stands for `λ = ∞`.
pub fn fill_holes<T: Scalar>(w: &GridSet<T>, threshold: Option<T>) -> GridSet<T> {
    let mut mask = w.mask.clone();
    let mut keep = vec![true; w.components.len()];
    for k in w.interior() {
        let absorb = match threshold {
            None => true,
            Some(lambda) => measures::measure_infty(&w.lattice, &w.gamma(k)) <= lambda,
        };
        if absorb {
            keep[k] = false;
            for &c in &w.components[k].cells {
                mask[c] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; w.components.len()];
    let mut comps = Vec::new();
    for (k, comp) in w.components.iter().enumerate() {
        if keep[k] {
            remap[k] = comps.len();
            comps.push(comp.cells.clone());
        }
    }
    let order = w.ordering.iter().filter(|&&k| keep[k]).map(|&k| remap[k]).collect();
    build(w, mask, comps, order)
}

/// Smallest cell rectangle containing the component.
pub fn rectangle_hull<T: Scalar>(w: &GridSet<T>, k: usize) -> CellRect {
    bounding_rect(w.lattice.nx, &w.components[k].cells)
}

pub fn bounding_rect(nx: usize, cells: &[usize]) -> CellRect {
    let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0, 0);
    for &c in cells {
        let (i, j) = (c % nx, c / nx);
        i0 = i0.min(i);
        j0 = j0.min(j);
        i1 = i1.max(i + 1);
        j1 = j1.max(j + 1);
    }
    if cells.is_empty() {
        return CellRect::new(0, 0, 0, 0);
    }
    CellRect::new(i0, j0, i1, j1)
}

/// `W' = (W \ V) ∪ ∂V`: the cells of `V` leave the set and become a new
/// component placed first in the ordering; every old component loses the
/// cells of `V`.
pub fn subtract_and_mark<T: Scalar>(w: &GridSet<T>, v: &[usize]) -> Result<GridSet<T>> {
    let n = w.lattice.cell_count();
    let mut in_v = vec![false; n];
    for &c in v {
        if c >= n {
            return Err(Error::Precondition(format!("cell {c} lies outside the lattice")));
        }
        in_v[c] = true;
    }
    let v_cells: Vec<usize> = (0..n).filter(|&c| in_v[c]).collect();
    if v_cells.is_empty() {
        return Ok(w.clone());
    }
    let mask: Vec<bool> = w.mask.iter().zip(&in_v).map(|(&m, &x)| m && !x).collect();
    let mut comps = vec![v_cells];
    let mut remap = vec![usize::MAX; w.components.len()];
    for (k, comp) in w.components.iter().enumerate() {
        let rest: Vec<usize> = comp.cells.iter().copied().filter(|&c| !in_v[c]).collect();
        if !rest.is_empty() {
            remap[k] = comps.len();
            comps.push(rest);
        }
    }
    let order = std::iter::once(0)
        .chain(w.ordering.iter().filter(|&&k| remap[k] != usize::MAX).map(|&k| remap[k]))
        .collect();
    Ok(build(w, mask, comps, order))
}

/// Which touching pairs get merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeRule {
    /// Both components have `|Γ|_∞ ≤ k`.
    BothSmall,
    /// At least one component has `|Γ|_∞ ≤ k`.
    AnySmall,
}

/// Pairs of distinct components whose closures intersect, as sorted
/// `(a, b)` with `a < b`.
pub fn touching_pairs<T: Scalar>(w: &GridSet<T>) -> Vec<(usize, usize)> {
    let lat = &w.lattice;
    let (nx, ny) = (lat.nx, lat.ny);
    let mut pairs = Vec::new();
    for c in 0..lat.cell_count() {
        let Some(a) = w.component_of(c) else { continue };
        let (i, j) = (c % nx, c / nx);
        // Forward half of the 8-neighbourhood covers every unordered pair.
        let fwd = [(1i64, 0i64), (-1, 1), (0, 1), (1, 1)];
        for (di, dj) in fwd {
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                continue;
            }
            let d = jj as usize * nx + ii as usize;
            if let Some(b) = w.component_of(d) {
                if a != b {
                    pairs.push((a.min(b), a.max(b)));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Iteratively replace touching pairs of small components by the closure of
/// their union until no pair selected by `rule` remains.
pub fn merge_small_components<T: Scalar>(w: &GridSet<T>, k: T, rule: MergeRule) -> GridSet<T> {
    let mut current = w.clone();
    loop {
        let sizes: Vec<T> = (0..current.components.len())
            .map(|c| measures::measure_infty(&current.lattice, &current.gamma(c)))
            .collect();
        let pos: Vec<usize> = {
            let mut p = vec![0; current.components.len()];
            for (r, &c) in current.ordering.iter().enumerate() {
                p[c] = r;
            }
            p
        };
        let pick = touching_pairs(&current).into_iter().find(|&(a, b)| match rule {
            MergeRule::BothSmall => sizes[a] <= k && sizes[b] <= k,
            MergeRule::AnySmall => sizes[a] <= k || sizes[b] <= k,
        });
        let Some((a, b)) = pick else { return current };
        let (keep, drop) = if pos[a] <= pos[b] { (a, b) } else { (b, a) };
        let mut comps: Vec<Vec<usize>> = Vec::with_capacity(current.components.len() - 1);
        let mut remap = vec![usize::MAX; current.components.len()];
        for (c, comp) in current.components.iter().enumerate() {
            if c == drop {
                continue;
            }
            remap[c] = comps.len();
            let mut cells = comp.cells.clone();
            if c == keep {
                cells.extend_from_slice(&current.components[drop].cells);
                cells.sort_unstable();
            }
            comps.push(cells);
        }
        let order = current.ordering.iter().filter(|&&c| c != drop).map(|&c| remap[c]).collect();
        current = build(&current, current.mask.clone(), comps, order);
    }
}

#[derive(Clone, Debug)]
pub struct Rectangleized<T> {
    pub set: GridSet<T>,
    /// Measured `c` in `‖U‖_* ≤ (1 + cν)‖V‖_*` (0 when the norm did not grow).
    pub c_measured: T,
}

fn rect_difference_connected(a: &CellRect, b: &CellRect, nx: usize, ny: usize) -> bool {
    let mut sel = vec![false; nx * ny];
    let mut any = false;
    for c in a.cells(nx) {
        let (i, j) = (c % nx, c / nx);
        if !b.contains(i, j) {
            sel[c] = true;
            any = true;
        }
    }
    !any || connected_components(nx, ny, &sel).len() == 1
}

/// Replace the listed components `X_j` by pairwise disjoint pieces
/// `X'_j ⊆ Z_j` with `⋃ X̄'_j = ⋃ Z̄_j`, assigning each hull cell to the first
/// listed hull containing it. Pieces that fall apart become separate
/// components.
pub fn rectangleize<T: Scalar>(
    v: &GridSet<T>,
    hulls: &[(usize, CellRect)],
    nu: T,
    cfg: StarMeasureConfig<T>,
) -> Result<Rectangleized<T>> {
    let lat = &v.lattice;
    let (nx, ny) = (lat.nx, lat.ny);
    let two_s = lat.cell_side();
    for &(k, z) in hulls {
        let comp = &v.components[k];
        if comp.cells.iter().any(|&c| !z.contains(c % nx, c / nx)) || z.i1 > nx || z.j1 > ny {
            return Err(Error::Precondition(format!("hull of component {k} does not contain it")));
        }
        let gamma = v.gamma(k);
        let (p1, p2) = measures::projection_counts(lat, &gamma);
        let slack = nu * measures::measure_infty(lat, &gamma);
        let tol = two_s * T::lit(1e-12);
        if T::from_count(z.width()) * two_s > T::from_count(p1) * two_s + slack + tol
            || T::from_count(z.height()) * two_s > T::from_count(p2) * two_s + slack + tol
        {
            return Err(Error::Precondition(format!("hull of component {k} exceeds the projection budget")));
        }
    }
    for (x, &(ka, za)) in hulls.iter().enumerate() {
        for &(kb, zb) in &hulls[x + 1..] {
            if !rect_difference_connected(&za, &zb, nx, ny) && !rect_difference_connected(&zb, &za, nx, ny) {
                return Err(Error::Precondition(format!(
                    "hulls of components {ka} and {kb}: neither difference is connected"
                )));
            }
        }
    }

    let n = lat.cell_count();
    let mut owner = vec![usize::MAX; n];
    for (x, &(_, z)) in hulls.iter().enumerate() {
        for c in z.cells(nx) {
            if owner[c] == usize::MAX {
                owner[c] = x;
            }
        }
    }
    let mask: Vec<bool> = (0..n).map(|c| v.mask[c] && owner[c] == usize::MAX).collect();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    for x in 0..hulls.len() {
        let sel: Vec<bool> = (0..n).map(|c| owner[c] == x).collect();
        for piece in connected_components(nx, ny, &sel) {
            order.push(comps.len());
            comps.push(piece);
        }
    }
    let listed: Vec<bool> = {
        let mut l = vec![false; v.components.len()];
        for &(k, _) in hulls {
            l[k] = true;
        }
        l
    };
    for &k in &v.ordering {
        if listed[k] {
            continue;
        }
        let rest: Vec<usize> = v.components[k].cells.iter().copied().filter(|&c| owner[c] == usize::MAX).collect();
        if !rest.is_empty() {
            order.push(comps.len());
            comps.push(rest);
        }
    }
    let set = build(v, mask, comps, order);
    let before = measures::set_norm(v, NormKind::Star, cfg);
    let after = measures::set_norm(&set, NormKind::Star, cfg);
    let c_measured = if nu > T::zero() && before > T::zero() && after > before {
        (after / before - T::one()) / nu
    } else {
        T::zero()
    };
    Ok(Rectangleized { set, c_measured })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lattice::Lattice;
    use crate::linalg::Vec2;

    fn holes(n: usize, cells: &[(usize, usize)]) -> GridSet<f64> {
        let l = Lattice::new(0.5, 4, n, n, Vec2::zero());
        let mut mask = vec![true; n * n];
        for &(i, j) in cells {
            mask[l.idx(i, j)] = false;
        }
        GridSet::extract_components(mask, l).unwrap()
    }

    #[test]
    fn fill_holes_thresholds() {
        // 1-cell hole: |Γ|_∞ = √2; 4×4 hole: 4√2.
        let mut cells = vec![(1, 1)];
        for i in 4..8 {
            for j in 4..8 {
                cells.push((i, j));
            }
        }
        let w = holes(10, &cells);
        assert_eq!(fill_holes(&w, Some(0.0)).mask, w.mask);
        let some = fill_holes(&w, Some(2.0));
        assert_eq!(some.components.len(), 1);
        assert_eq!(some.components[0].cells.len(), 16);
        assert!(fill_holes(&w, None).components.is_empty());
    }

    #[test]
    fn subtract_disjoint_adds_one_component() {
        let w = holes(8, &[(1, 1)]);
        let out = subtract_and_mark(&w, &[w.lattice.idx(5, 5)]).unwrap();
        assert_eq!(out.components.len(), 2);
        assert_eq!(out.components[out.ordering[0]].cells, vec![w.lattice.idx(5, 5)]);
    }

    #[test]
    fn subtract_existing_component_keeps_mask() {
        let w = holes(8, &[(3, 3)]);
        let out = subtract_and_mark(&w, &[w.lattice.idx(3, 3)]).unwrap();
        assert_eq!(out.mask, w.mask);
        assert_eq!(out.components.len(), 1);
    }

    #[test]
    fn merge_chain_transitively() {
        let w = holes(10, &[(2, 2), (3, 3), (4, 4)]);
        assert_eq!(w.components.len(), 3);
        let merged = merge_small_components(&w, 10.0, MergeRule::BothSmall);
        assert_eq!(merged.components.len(), 1);
        assert!(touching_pairs(&merged).is_empty());
        assert_eq!(merged.mask, w.mask);
    }

    #[test]
    fn rectangleize_single_is_hull() {
        let w = holes(10, &[(2, 2), (3, 2), (2, 3)]);
        let z = rectangle_hull(&w, 0);
        let r = rectangleize(&w, &[(0, z)], 0.0, StarMeasureConfig::default()).unwrap();
        assert_eq!(r.set.components.len(), 1);
        assert_eq!(r.set.components[0].cells.len(), 4);
    }

    #[test]
    fn rectangleize_rejects_bad_hull() {
        let w = holes(10, &[(2, 2)]);
        let z = CellRect::new(2, 2, 6, 3);
        assert!(rectangleize(&w, &[(0, z)], 0.0, StarMeasureConfig::default()).is_err());
    }
}
