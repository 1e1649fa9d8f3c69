//! Harmonic splitting `y = w + z` with `w` discrete-harmonic and `w = y` on
//! the region boundary.

use crate::error::{Error, Result};
use crate::fields::energy::jump_edges_in;
use crate::fields::{cell_energy, DeformationField};
use crate::linalg::Vec2;
use crate::local::fit::sample_weight;
use crate::scalar::{tree_sum, Scalar};

#[derive(Clone, Debug)]
pub struct HarmonicSplit<T> {
    pub w: DeformationField<T>,
    pub z: DeformationField<T>,
    /// CG iterations summed over both components.
    pub iterations: usize,
    /// Final relative residual (max over components).
    pub residual: T,
    /// `‖∇z‖²_{L²}`.
    pub grad_z_sq: T,
    /// `‖dist(∇y, SO(2))‖²_{L²}` on the region.
    pub dist_sq: T,
}

impl<T: Scalar> HarmonicSplit<T> {
    /// `‖∇z‖ / ‖dist(∇y, SO(2))‖`; `None` for a rigid region.
    pub fn constant(&self) -> Option<T> {
        (self.dist_sq > T::zero()).then(|| (self.grad_z_sq / self.dist_sq).sqrt())
    }
}

/// Relative residual target: `1e-10`, loosened to a few ulps for `f32`.
pub fn solver_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::lit(128.0) * T::eps())
}

/// Unknown nodes of the 5-point system with their unknown neighbours.
struct NodeSystem {
    unknowns: Vec<usize>,
    neighbours: Vec<[Option<usize>; 4]>,
    /// `(cell, corner slot)` carrying each known neighbour's value, taken
    /// from a cell that contains both nodes.
    boundary_neighbours: Vec<Vec<(usize, usize)>>,
}

fn build_system(nx: usize, ny: usize, inside: &[bool]) -> (NodeSystem, Vec<bool>) {
    let nxn = nx + 1;
    let nodes = nxn * (ny + 1);
    let mut touched = vec![0u8; nodes];
    for c in 0..nx * ny {
        if inside[c] {
            let (i, j) = (c % nx, c / nx);
            for (di, dj) in crate::fields::CORNER_OFFSETS {
                touched[(j + dj) * nxn + i + di] += 1;
            }
        }
    }
    let interior: Vec<bool> = touched.iter().map(|&t| t == 4).collect();
    let mut index = vec![usize::MAX; nodes];
    let mut unknowns = Vec::new();
    for n in 0..nodes {
        if interior[n] {
            index[n] = unknowns.len();
            unknowns.push(n);
        }
    }
    let mut neighbours = Vec::with_capacity(unknowns.len());
    let mut boundary_neighbours = Vec::with_capacity(unknowns.len());
    for &n in &unknowns {
        // Interior nodes have all four cells inside, hence all four neighbours exist.
        let around = [n - 1, n + 1, n - nxn, n + nxn];
        let (i, j) = (n % nxn, n / nxn);
        // West, east, south, north neighbour: the cell SW/SE/SW/NW of the node
        // and the slot of the neighbour in it.
        let carriers = [
            ((j - 1) * nx + i - 1, 3),
            ((j - 1) * nx + i, 2),
            ((j - 1) * nx + i - 1, 1),
            (j * nx + i - 1, 2),
        ];
        let mut nb = [None; 4];
        let mut bd = Vec::new();
        for (k, &m) in around.iter().enumerate() {
            if interior[m] {
                nb[k] = Some(index[m]);
            } else {
                bd.push(carriers[k]);
            }
        }
        neighbours.push(nb);
        boundary_neighbours.push(bd);
    }
    (NodeSystem { unknowns, neighbours, boundary_neighbours }, interior)
}

fn apply<T: Scalar>(sys: &NodeSystem, x: &[T], out: &mut [T]) {
    let four = T::lit(4.0);
    for (k, nb) in sys.neighbours.iter().enumerate() {
        let mut v = four * x[k];
        for m in nb.iter().flatten() {
            v -= x[*m];
        }
        out[k] = v;
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let v: Vec<T> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
    tree_sum(&v)
}

/// Conjugate gradients on the SPD 5-point system; returns (iterations, relative residual).
fn cg<T: Scalar>(sys: &NodeSystem, b: &[T], x: &mut [T], tol: T, budget: usize) -> Result<(usize, T)> {
    let n = b.len();
    let mut ax = vec![T::zero(); n];
    apply(sys, x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(b, a)| *b - *a).collect();
    let scale = dot(b, b).sqrt().max(dot(&ax, &ax).sqrt());
    if scale == T::zero() {
        return Ok((0, T::zero()));
    }
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![T::zero(); n];
    for it in 0..=budget {
        let rel = rr.sqrt() / scale;
        if rel <= tol {
            return Ok((it, rel));
        }
        if it == budget {
            break;
        }
        apply(sys, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    Err(Error::NoConvergence(format!(
        "harmonic solve stopped after {budget} iterations at relative residual {:e}",
        (rr.sqrt() / scale).to_f64().unwrap_or(f64::NAN)
    )))
}

/// Split `y` on the active cells of `region`. The region must carry no jump
/// edge between two of its cells.
pub fn harmonic_split<T: Scalar>(f: &DeformationField<T>, region: &[bool]) -> Result<HarmonicSplit<T>> {
    let (nx, ny) = (f.nx(), f.ny());
    let inside: Vec<bool> = region.iter().zip(&f.active).map(|(r, a)| *r && *a).collect();
    if !inside.iter().any(|&b| b) {
        return Err(Error::EmptyFit("harmonic split on an empty region".into()));
    }
    if let Some(e) = jump_edges_in(f, Some(&inside)).next() {
        return Err(Error::Precondition(format!("region contains jump edge {e}")));
    }
    let nodal = f.nodal_average(&inside);
    let (sys, interior) = build_system(nx, ny, &inside);
    let budget = 10 * sys.unknowns.len().max(1);
    let tol = solver_tolerance::<T>();
    let mut w: Vec<Vec2<T>> = nodal.iter().map(|v| v.unwrap_or_else(Vec2::zero)).collect();
    let mut iterations = 0;
    let mut residual = T::zero();
    for comp in 0..2 {
        let get = |v: Vec2<T>| if comp == 0 { v.x } else { v.y };
        let b: Vec<T> = sys
            .boundary_neighbours
            .iter()
            .map(|bd| bd.iter().map(|&(c, slot)| get(f.corners[c][slot])).fold(T::zero(), |a, v| a + v))
            .collect();
        let mut x: Vec<T> = sys.unknowns.iter().map(|&n| get(w[n])).collect();
        let (it, rel) = cg(&sys, &b, &mut x, tol, budget)?;
        iterations += it;
        residual = residual.max(rel);
        for (k, &n) in sys.unknowns.iter().enumerate() {
            if comp == 0 {
                w[n].x = x[k];
            } else {
                w[n].y = x[k];
            }
        }
    }
    let nxn = nx + 1;
    let corners = (0..f.cell_count())
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let mut v = f.corners[c];
            if inside[c] {
                for (slot, (di, dj)) in crate::fields::CORNER_OFFSETS.iter().enumerate() {
                    let n = (j + dj) * nxn + i + di;
                    if interior[n] {
                        v[slot] = w[n];
                    }
                }
            }
            v
        })
        .collect();
    let wf = DeformationField::new(f.lattice, corners, inside.clone());
    let z = f.difference(&wf);
    let z = DeformationField::new(z.lattice, z.corners, inside.clone());
    let h2 = f.h() * f.h();
    let gz: Vec<T> = (0..f.cell_count()).filter_map(|c| z.gradient(c)).map(|g| g.norm_sq() * h2).collect();
    Ok(HarmonicSplit {
        w: wf,
        z,
        iterations,
        residual,
        grad_z_sq: tree_sum(&gz),
        dist_sq: cell_energy(f, Some(&inside)),
    })
}

/// `‖z‖²_{L²}` by the corner rule, for reporting.
pub fn l2_norm_sq<T: Scalar>(f: &DeformationField<T>) -> T {
    let w = sample_weight(f.h());
    let vals: Vec<T> = (0..f.cell_count())
        .filter(|&c| f.active[c])
        .flat_map(|c| f.corners[c].iter().map(move |v| v.norm_sq() * w).collect::<Vec<_>>())
        .collect();
    tree_sum(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    fn disk_region(n: usize) -> Vec<bool> {
        (0..n * n)
            .map(|c| {
                let (i, j) = ((c % n) as f64 + 0.5, (c / n) as f64 + 0.5);
                let r = n as f64 / 2.0;
                (i - r).powi(2) + (j - r).powi(2) < r * r * 0.8
            })
            .collect()
    }

    #[test]
    fn harmonic_data_is_reproduced() {
        let n = 24;
        let l = Lattice::with_cell_side(1.0 / n as f64, n, n, Vec2::zero());
        let f = DeformationField::from_fn(l, vec![true; n * n], |_, x| {
            Vec2::new(x.x * x.x - x.y * x.y + 0.3 * x.x, 2.0 * x.x * x.y - x.y)
        });
        let split = harmonic_split(&f, &disk_region(n)).unwrap();
        // (x² − y², 2xy) is exactly discrete-harmonic for the 5-point stencil.
        let zmax = split.z.corners.iter().enumerate().filter(|(c, _)| split.z.active[*c]).flat_map(|(_, v)| v.iter().map(|p| p.norm())).fold(0.0, f64::max);
        assert!(zmax < 1e-9, "{zmax}");
        assert!(split.residual <= 1e-10);
    }

    #[test]
    fn dirichlet_data_is_exact_on_boundary() {
        let n = 16;
        let l = Lattice::with_cell_side(1.0 / n as f64, n, n, Vec2::zero());
        let f = DeformationField::from_fn(l, vec![true; n * n], |_, x| Vec2::new((3.0 * x.x).sin() * x.y, x.y.exp()));
        let region = disk_region(n);
        let split = harmonic_split(&f, &region).unwrap();
        let (sys, interior) = build_system(n, n, &region);
        assert!(!sys.unknowns.is_empty());
        for c in 0..n * n {
            if !region[c] {
                continue;
            }
            let (i, j) = (c % n, c / n);
            for (s, (di, dj)) in crate::fields::CORNER_OFFSETS.iter().enumerate() {
                if !interior[(j + dj) * (n + 1) + i + di] {
                    assert_eq!(split.w.corners[c][s], f.corners[c][s]);
                }
            }
        }
    }

    #[test]
    fn jumps_inside_region_are_rejected() {
        let n = 4;
        let l = Lattice::with_cell_side(0.25, n, n, Vec2::zero());
        let f = DeformationField::from_fn(l, vec![true; n * n], |c, x| if c % n >= 2 { x + Vec2::new(0.1, 0.0) } else { x });
        assert!(matches!(harmonic_split(&f, &vec![true; n * n]), Err(Error::Precondition(_))));
    }
}
