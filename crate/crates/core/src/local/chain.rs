//! Rotation fields chained over squares, and propagation of rigid motions
//! along chains of overlapping rectangles.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fields::{cell_energy, DeformationField};
use crate::grid::CellRect;
use crate::linalg::{Mat2, Vec2};
use crate::local::fit::{best_fit_rotation, rotation_residual, sample_weight, samples};
use crate::local::motion::RigidMotion;
use crate::scalar::{tree_sum, Scalar};

/// Squares of side `2k` cells tiling the grid from `offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareTiling {
    pub k: usize,
    pub offset: (usize, usize),
}

impl SquareTiling {
    pub fn new(k: usize) -> Self {
        Self { k, offset: (0, 0) }
    }

    /// Number of whole squares along each axis of an `nx × ny` grid.
    pub fn counts(&self, nx: usize, ny: usize) -> (usize, usize) {
        let side = 2 * self.k;
        let fit = |n: usize, o: usize| if n >= o { (n - o) / side } else { 0 };
        (fit(nx, self.offset.0), fit(ny, self.offset.1))
    }

    pub fn rect(&self, a: usize, b: usize) -> CellRect {
        let side = 2 * self.k;
        let (i0, j0) = (self.offset.0 + a * side, self.offset.1 + b * side);
        CellRect::new(i0, j0, i0 + side, j0 + side)
    }
}

#[derive(Clone, Debug)]
pub struct SquareFit<T> {
    /// Square coordinates in the tiling.
    pub at: (usize, usize),
    pub rect: CellRect,
    pub rotation: Mat2<T>,
    /// `γ(p)`: elastic energy on the square.
    pub gamma: T,
    /// BFS parent within the component (`None` for the root).
    pub parent: Option<usize>,
    /// Number of squares on the chain from the root, root included.
    pub path_len: usize,
}

#[derive(Clone, Debug)]
pub struct SquareLink<T> {
    pub a: usize,
    pub b: usize,
    /// `s²|R(a) − R(b)|²` with `s = k h`.
    pub lhs: T,
    /// `γ(a) + γ(b)`.
    pub rhs: T,
}

#[derive(Clone, Debug)]
pub struct ChainComponent<T> {
    pub squares: Vec<SquareFit<T>>,
    pub links: Vec<SquareLink<T>>,
    /// Global rotation `R = R(p₀)` of the root square.
    pub rotation: Mat2<T>,
    /// `‖∇y − R‖²` on the union of the squares.
    pub deviation: T,
    /// `‖dist(∇y, SO(2))‖²` on the same union.
    pub energy: T,
    /// `(s⁻²|U|)²`, the shape factor of the weak rigidity bound.
    pub shape_factor: T,
    /// `|U|`.
    pub area: T,
}

impl<T: Scalar> ChainComponent<T> {
    /// Round-off floor for squared `L²` quantities on the union.
    fn floor(&self) -> T {
        let e = T::lit(1e4) * T::eps();
        e * e * self.area
    }

    /// `deviation / energy`; `None` when the union carries no elastic energy
    /// above round-off.
    pub fn ratio(&self) -> Option<T> {
        (self.energy > self.floor()).then(|| self.deviation / self.energy)
    }

    /// Energy-free union fitted exactly by one rotation.
    pub fn exact_rigid(&self) -> bool {
        self.energy <= self.floor() && self.deviation <= self.floor()
    }

    pub fn mask(&self, nx: usize, ny: usize) -> Vec<bool> {
        let mut m = vec![false; nx * ny];
        for s in &self.squares {
            for c in s.rect.cells(nx) {
                m[c] = true;
            }
        }
        m
    }
}

/// Per-square rotations on the squares of `tiling` contained in `u`, chained
/// breadth-first from the first square of each square-connected component.
pub fn chain_rotation_field<T: Scalar>(
    f: &DeformationField<T>,
    u: &[bool],
    tiling: SquareTiling,
) -> Result<Vec<ChainComponent<T>>> {
    if tiling.k == 0 {
        return Err(invalid("square half-side must be positive"));
    }
    let (nx, ny) = (f.nx(), f.ny());
    let (na, nb) = tiling.counts(nx, ny);
    let inside = |c: usize| u[c] && f.active[c];
    let mut slot = vec![usize::MAX; na * nb];
    let mut coords = Vec::new();
    for b in 0..nb {
        for a in 0..na {
            if tiling.rect(a, b).cells(nx).all(inside) {
                slot[b * na + a] = coords.len();
                coords.push((a, b));
            }
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyFit(format!("no square of side {} fits in the set", 2 * tiling.k)));
    }
    let fits: Vec<(Mat2<T>, T)> = coords
        .par_iter()
        .map(|&(a, b)| {
            let mut m = vec![false; nx * ny];
            for c in tiling.rect(a, b).cells(nx) {
                m[c] = true;
            }
            let r = best_fit_rotation(f, &m).expect("square has gradient cells").r;
            (r, cell_energy(f, Some(&m)))
        })
        .collect();
    let s = T::from_count(tiling.k) * f.h();
    let neighbours = |q: usize| {
        let (a, b) = coords[q];
        let mut out = Vec::with_capacity(4);
        if a > 0 {
            out.push(slot[b * na + a - 1]);
        }
        if a + 1 < na {
            out.push(slot[b * na + a + 1]);
        }
        if b > 0 {
            out.push(slot[(b - 1) * na + a]);
        }
        if b + 1 < nb {
            out.push(slot[(b + 1) * na + a]);
        }
        out.retain(|&x| x != usize::MAX);
        out
    };
    let mut seen = vec![false; coords.len()];
    let mut comps = Vec::new();
    for root in 0..coords.len() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut order = vec![root];
        let mut parent = vec![None];
        let mut depth = vec![1usize];
        let mut local = std::collections::BTreeMap::new();
        local.insert(root, 0usize);
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            for nbq in neighbours(q) {
                if !seen[nbq] {
                    seen[nbq] = true;
                    local.insert(nbq, order.len());
                    order.push(nbq);
                    parent.push(Some(head));
                    depth.push(depth[head] + 1);
                }
            }
            head += 1;
        }
        let squares: Vec<SquareFit<T>> = order
            .iter()
            .enumerate()
            .map(|(li, &q)| SquareFit {
                at: coords[q],
                rect: tiling.rect(coords[q].0, coords[q].1),
                rotation: fits[q].0,
                gamma: fits[q].1,
                parent: parent[li],
                path_len: depth[li],
            })
            .collect();
        let mut links = Vec::new();
        for (li, &q) in order.iter().enumerate() {
            for nbq in neighbours(q) {
                let lj = local[&nbq];
                if li < lj {
                    let d = (squares[li].rotation - squares[lj].rotation).norm_sq();
                    links.push(SquareLink { a: li, b: lj, lhs: s * s * d, rhs: squares[li].gamma + squares[lj].gamma });
                }
            }
        }
        let rotation = squares[0].rotation;
        let mut comp = ChainComponent {
            squares,
            links,
            rotation,
            deviation: T::zero(),
            energy: T::zero(),
            shape_factor: T::zero(),
            area: T::zero(),
        };
        let mask = comp.mask(nx, ny);
        comp.deviation = rotation_residual(f, &mask, rotation);
        comp.energy = cell_energy(f, Some(&mask));
        let area = T::from_count(mask.iter().filter(|&&b| b).count()) * f.h() * f.h();
        comp.shape_factor = (area / (s * s)).powi(2);
        comp.area = area;
        comps.push(comp);
    }
    Ok(comps)
}

#[derive(Clone, Debug)]
pub struct ChainPropagation<T> {
    /// `‖y − (R₁x + c₁)‖²` on the last rectangle.
    pub lhs: T,
    /// `m·(e_end + Σ_j κ_j e_j)`, an upper bound for `lhs`.
    pub rhs: T,
    /// `m³·max(1, κ)·(e_end + Σ_j e_j)`, the cubic path-length form.
    pub rhs_cubic: T,
    /// `e_j = ‖M_j − M_{j−1}‖²` on `B_{j−1} ∪ B_j`.
    pub link_deviations: Vec<T>,
    /// `‖y − M_m‖²` on the last rectangle.
    pub end_deviation: T,
    /// Overlap geometry factors: the largest ratio of `‖g‖²` on the last
    /// rectangle to `‖g‖²` on `B_{j−1} ∪ B_j` over affine `g`.
    pub kappa: Vec<T>,
}

fn gram<T: Scalar>(f: &DeformationField<T>, mask: &[bool], x0: Vec2<T>) -> [[f64; 3]; 3] {
    let w = sample_weight(f.h()).to_f64().unwrap_or(0.0);
    let mut g = [[0.0f64; 3]; 3];
    for c in 0..f.cell_count() {
        if !mask[c] || !f.active[c] {
            continue;
        }
        for x in f.corner_positions(c) {
            let d = x - x0;
            let phi = [1.0, d.x.to_f64().unwrap_or(0.0), d.y.to_f64().unwrap_or(0.0)];
            for (r, row) in g.iter_mut().enumerate() {
                for (s, v) in row.iter_mut().enumerate() {
                    *v += w * phi[r] * phi[s];
                }
            }
        }
    }
    g
}

fn cholesky(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Largest eigenvalue of a symmetric 3×3 matrix by cyclic Jacobi sweeps.
fn sym_max_eigen(mut a: [[f64; 3]; 3]) -> f64 {
    for _ in 0..50 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off < 1e-30 * (a[0][0].powi(2) + a[1][1].powi(2) + a[2][2].powi(2)).max(1e-300) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut b = a;
            for k in 0..3 {
                b[k][p] = c * a[k][p] - s * a[k][q];
                b[k][q] = s * a[k][p] + c * a[k][q];
            }
            let mut d = b;
            for k in 0..3 {
                d[p][k] = c * b[p][k] - s * b[q][k];
                d[q][k] = s * b[p][k] + c * b[q][k];
            }
            a = d;
        }
    }
    a[0][0].max(a[1][1]).max(a[2][2])
}

/// `λ_max(G_S⁻¹ G_T)`: how much an affine map's `L²` norm can grow from `S` to `T`.
pub fn affine_growth(gs: &[[f64; 3]; 3], gt: &[[f64; 3]; 3]) -> Option<f64> {
    let l = cholesky(gs)?;
    // Solve L X = G_T, then C = X L⁻ᵀ (i.e. L⁻¹ G_T L⁻ᵀ).
    let solve_lower = |b: [f64; 3]| {
        let mut x = [0.0; 3];
        for i in 0..3 {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i][k] * x[k];
            }
            x[i] = s / l[i][i];
        }
        x
    };
    let cols: Vec<[f64; 3]> = (0..3).map(|j| solve_lower([gt[0][j], gt[1][j], gt[2][j]])).collect();
    let x = [[cols[0][0], cols[1][0], cols[2][0]], [cols[0][1], cols[1][1], cols[2][1]], [cols[0][2], cols[1][2], cols[2][2]]];
    let rows: Vec<[f64; 3]> = (0..3).map(|i| solve_lower(x[i])).collect();
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = 0.5 * (rows[i][j] + rows[j][i]);
        }
    }
    Some(sym_max_eigen(c))
}

fn rect_mask(nx: usize, ny: usize, rects: &[CellRect]) -> Vec<bool> {
    let mut m = vec![false; nx * ny];
    for r in rects {
        for c in r.cells(nx) {
            m[c] = true;
        }
    }
    m
}

fn motion_gap<T: Scalar>(f: &DeformationField<T>, mask: &[bool], a: &RigidMotion<T>, b: &RigidMotion<T>) -> T {
    let w = sample_weight(f.h());
    let vals: Vec<T> = samples(f, mask).into_iter().map(|(x, _)| (a.apply(x) - b.apply(x)).norm_sq() * w).collect();
    tree_sum(&vals)
}

/// Propagate the first motion of a chain to the last rectangle and return both
/// sides of the chained deviation bound.
pub fn rigid_chain_propagate<T: Scalar>(
    f: &DeformationField<T>,
    rects: &[CellRect],
    motions: &[RigidMotion<T>],
) -> Result<ChainPropagation<T>> {
    if rects.is_empty() || rects.len() != motions.len() {
        return Err(invalid("chain needs one motion per rectangle"));
    }
    let (nx, ny) = (f.nx(), f.ny());
    for (j, w) in rects.windows(2).enumerate() {
        if !w[0].intersects(&w[1]) {
            return Err(invalid(format!("rectangles {j} and {} do not overlap", j + 1)));
        }
    }
    let m = rects.len();
    let last = rect_mask(nx, ny, &rects[m - 1..]);
    let x0 = {
        let r = rects[m - 1];
        let lo = f.lattice.node(r.i0, r.j0);
        let hi = f.lattice.node(r.i1, r.j1);
        (lo + hi).scale(T::half())
    };
    let g_last = gram(f, &last, x0);
    let residual = |mot: &RigidMotion<T>, mask: &[bool]| {
        let w = sample_weight(f.h());
        let vals: Vec<T> = samples(f, mask).into_iter().map(|(x, y)| (y - mot.apply(x)).norm_sq() * w).collect();
        tree_sum(&vals)
    };
    let lhs = residual(&motions[0], &last);
    let end_deviation = residual(&motions[m - 1], &last);
    let mut link_deviations = Vec::with_capacity(m.saturating_sub(1));
    let mut kappa = Vec::with_capacity(m.saturating_sub(1));
    for j in 1..m {
        let pair = rect_mask(nx, ny, &rects[j - 1..=j]);
        link_deviations.push(motion_gap(f, &pair, &motions[j], &motions[j - 1]));
        let k = affine_growth(&gram(f, &pair, x0), &g_last)
            .ok_or_else(|| Error::Precondition(format!("degenerate rectangles at link {j}")))?;
        kappa.push(T::lit(k));
    }
    let mt = T::from_count(m);
    let weighted: Vec<T> = link_deviations.iter().zip(&kappa).map(|(e, k)| *e * *k).collect();
    let rhs = mt * (end_deviation + tree_sum(&weighted));
    let kmax = kappa.iter().copied().fold(T::one(), T::max);
    let rhs_cubic = mt * mt * mt * kmax * (end_deviation + tree_sum(&link_deviations));
    Ok(ChainPropagation { lhs, rhs, rhs_cubic, link_deviations, end_deviation, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    fn grid(nx: usize, ny: usize, h: f64) -> Lattice<f64> {
        Lattice::with_cell_side(h, nx, ny, Vec2::zero())
    }

    #[test]
    fn rigid_field_is_one_rotation() {
        let l = grid(16, 8, 0.1);
        let m = RigidMotion::from_angle(0.9, Vec2::new(2.0, 1.0));
        let f = DeformationField::from_fn(l, vec![true; 128], |_, x| m.apply(x));
        let comps = chain_rotation_field(&f, &vec![true; 128], SquareTiling::new(2)).unwrap();
        assert_eq!(comps.len(), 1);
        let c = &comps[0];
        assert_eq!(c.squares.len(), 8);
        assert!(c.exact_rigid() && c.ratio().is_none());
        assert!((c.rotation - m.r).norm() < 1e-12);
        assert_eq!(c.squares.iter().map(|s| s.path_len).max(), Some(5));
    }

    #[test]
    fn separated_squares_form_components() {
        let l = grid(8, 4, 0.25);
        let f = DeformationField::from_fn(l, vec![true; 32], |_, x| x);
        let u: Vec<bool> = (0..32).map(|c| c % 8 != 4 && c % 8 != 5 && c % 8 != 3 && c % 8 != 2).collect();
        let comps = chain_rotation_field(&f, &u, SquareTiling::new(1)).unwrap();
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn affine_growth_of_identical_sets_is_one() {
        let l = grid(6, 6, 1.0);
        let f = DeformationField::from_fn(l, vec![true; 36], |_, x| x);
        let m = rect_mask(6, 6, &[CellRect::new(0, 0, 4, 2)]);
        let g = gram(&f, &m, Vec2::new(1.0, 1.0));
        assert!((affine_growth(&g, &g).unwrap() - 1.0).abs() < 1e-12);
        let big = gram(&f, &vec![true; 36], Vec2::new(1.0, 1.0));
        assert!(affine_growth(&g, &big).unwrap() > 1.0);
    }

    #[test]
    fn propagation_bound_holds() {
        let l = grid(12, 4, 0.25);
        let f = DeformationField::from_fn(l, vec![true; 48], |_, x| Vec2::new(x.x + 0.05 * x.y * x.x, x.y - 0.02 * x.x * x.x));
        let rects = [CellRect::new(0, 0, 4, 4), CellRect::new(3, 0, 8, 4), CellRect::new(7, 0, 12, 4)];
        let motions: Vec<RigidMotion<f64>> = rects
            .iter()
            .map(|r| crate::local::fit::best_fit_rigid_motion(&f, &rect_mask(12, 4, &[*r])).unwrap())
            .collect();
        let p = rigid_chain_propagate(&f, &rects, &motions).unwrap();
        assert!(p.lhs <= p.rhs && p.rhs <= p.rhs_cubic);
        assert!(rigid_chain_propagate(&f, &[rects[0], rects[2]], &motions[..2]).is_err());
    }
}
