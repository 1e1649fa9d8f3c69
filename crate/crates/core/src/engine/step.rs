//! Kernels of a single scale: carving, piecewise rotation maps, local
//! motions on the `λ`-points, and healing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::model::MotionModel;
use crate::error::Result;
use crate::fields::{DeformationField, CORNER_OFFSETS};
use crate::grid::measures::rect_measures;
use crate::grid::{CellRect, Lattice, SHIFTS};
use crate::linalg::{Mat2, Vec2};
use crate::scalar::tree_sum;

const NONE: u32 = u32::MAX;

/// Intervals of a 1-D tiling by `side` starting at `offset` (mod `side`);
/// the end pieces are clipped to `[0, n)`.
pub fn tiles_1d(n: usize, side: usize, offset: usize) -> Vec<(usize, usize)> {
    let off = offset % side;
    let mut out = Vec::new();
    let mut a = 0;
    if off > 0 {
        out.push((0, off.min(n)));
        a = off;
    }
    while a < n {
        out.push((a, (a + side).min(n)));
        a += side;
    }
    out
}

/// Row-major clipped square tiling of the window.
pub fn tiles(nx: usize, ny: usize, side: usize, ox: usize, oy: usize) -> Vec<CellRect> {
    let xs = tiles_1d(nx, side, ox);
    tiles_1d(ny, side, oy)
        .into_iter()
        .flat_map(|(j0, j1)| xs.iter().map(move |&(i0, i1)| CellRect::new(i0, j0, i1, j1)))
        .collect()
}

/// 4-connected components of the selected cells of `rect`, each sorted,
/// ordered by smallest cell.
pub fn rect_components(nx: usize, rect: &CellRect, select: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let (w, h) = (rect.width(), rect.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for lj in 0..h {
        for li in 0..w {
            let start = lj * w + li;
            let cell = (rect.j0 + lj) * nx + rect.i0 + li;
            if seen[start] || !select(cell) {
                continue;
            }
            seen[start] = true;
            stack.push((li, lj));
            let mut cells = Vec::new();
            while let Some((a, b)) = stack.pop() {
                cells.push((rect.j0 + b) * nx + rect.i0 + a);
                let nb = [
                    (a > 0).then(|| (a - 1, b)),
                    (a + 1 < w).then(|| (a + 1, b)),
                    (b > 0).then(|| (a, b - 1)),
                    (b + 1 < h).then(|| (a, b + 1)),
                ];
                for (x, y) in nb.into_iter().flatten() {
                    let l = y * w + x;
                    if !seen[l] && select((rect.j0 + y) * nx + rect.i0 + x) {
                        seen[l] = true;
                        stack.push((x, y));
                    }
                }
            }
            cells.sort_unstable();
            out.push(cells);
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CarveOutcome {
    /// Selected squares.
    pub squares: Vec<CellRect>,
    /// `γ_J = Σ_{p∈J} γ(p)`.
    pub gamma: f64,
    /// `Σ_{p∈J} |∂Q(p)|_*`.
    pub boundary_star: f64,
    pub threshold: f64,
}

impl CarveOutcome {
    pub fn cells(&self, nx: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.squares.iter().flat_map(|r| r.cells(nx).collect::<Vec<_>>()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `Σ|∂Q|_* ≤ 8γ_J/ε_j`.
    pub fn within_budget(&self, eps: f64) -> bool {
        self.boundary_star <= 8.0 * self.gamma / eps
    }
}

/// Squares of side `2k` (aligned tiling) with `γ(p) = ∫_{Q∩W} density > c_*·ε_j·k`.
pub fn select_carving<M: MotionModel>(
    model: &M,
    f: &DeformationField<f64>,
    w_mask: &[bool],
    k_cells: usize,
    eps: f64,
    threshold_c: f64,
    h_star: f64,
) -> CarveOutcome {
    let (nx, ny) = (f.nx(), f.ny());
    let h = f.h();
    let threshold = threshold_c * eps * (k_cells as f64 * h);
    let grid = f.lattice;
    let picked: Vec<(CellRect, f64)> = tiles(nx, ny, 2 * k_cells, 0, 0)
        .into_par_iter()
        .filter_map(|q| {
            let vals: Vec<f64> = q
                .cells(nx)
                .filter(|&c| w_mask[c])
                .filter_map(|c| f.gradient(c))
                .map(|g| model.density(g) * h * h)
                .collect();
            let gamma = tree_sum(&vals);
            (gamma > threshold).then_some((q, gamma))
        })
        .collect();
    let star: Vec<f64> = picked
        .iter()
        .map(|(q, _)| {
            let (hd, inf) = rect_measures(&grid, q);
            h_star * hd + (1.0 - h_star) * inf
        })
        .collect();
    let gammas: Vec<f64> = picked.iter().map(|p| p.1).collect();
    CarveOutcome {
        squares: picked.into_iter().map(|p| p.0).collect(),
        gamma: tree_sum(&gammas),
        boundary_star: tree_sum(&star),
        threshold,
    }
}

/// Piecewise constant coarse field `R̂_i` on one shifted `k`-lattice.
#[derive(Clone, Debug)]
pub struct RotationMap {
    pub shift: (u8, u8),
    pub rot: Vec<Option<Mat2<f64>>>,
    /// `Σ_W |∇y − R̂|² h²`.
    pub dev2: f64,
    /// `Σ_W |∇y − R̂|⁴ h²`.
    pub dev4: f64,
}

/// `R̂_i` for the four shifts: on each square `Q` of side `2k` and each
/// component `F` of `Q ∩ W`, the fit over the component of `Q̂ ∩ W`
/// containing `F`, with `Q̂` the concentric square of side `4k`. The last map
/// is the one aligned with the nodes.
pub fn rotation_maps<M: MotionModel>(
    model: &M,
    f: &DeformationField<f64>,
    w_mask: &[bool],
    k_cells: usize,
) -> Result<Vec<RotationMap>> {
    let (nx, ny) = (f.nx(), f.ny());
    let h2 = f.h() * f.h();
    let inside = |c: usize| w_mask[c] && f.active[c];
    let mut out = Vec::with_capacity(4);
    for &(sx, sy) in &SHIFTS {
        let (ox, oy) = ((1 - sx as usize) * k_cells, (1 - sy as usize) * k_cells);
        let per_tile: Vec<Vec<(Vec<usize>, Mat2<f64>)>> = tiles(nx, ny, 2 * k_cells, ox, oy)
            .into_par_iter()
            .map(|q| -> Result<Vec<(Vec<usize>, Mat2<f64>)>> {
                let comps = rect_components(nx, &q, inside);
                if comps.is_empty() {
                    return Ok(Vec::new());
                }
                let k = k_cells as i64;
                let big = CellRect::clipped(
                    q.i0 as i64 - k,
                    q.j0 as i64 - k,
                    q.i1 as i64 + k,
                    q.j1 as i64 + k,
                    nx,
                    ny,
                );
                let big_comps = rect_components(nx, &big, inside);
                let mut fits: Vec<Option<Mat2<f64>>> = vec![None; big_comps.len()];
                let mut res = Vec::with_capacity(comps.len());
                for comp in comps {
                    let first = comp[0];
                    let b = big_comps
                        .iter()
                        .position(|bc| bc.binary_search(&first).is_ok())
                        .expect("square component lies in the enlarged square");
                    let r = match fits[b] {
                        Some(r) => r,
                        None => {
                            let r = model.coarse(f, &big_comps[b])?;
                            fits[b] = Some(r);
                            r
                        }
                    };
                    res.push((comp, r));
                }
                Ok(res)
            })
            .collect::<Result<_>>()?;
        let mut rot = vec![None; f.cell_count()];
        for (cells, r) in per_tile.into_iter().flatten() {
            for c in cells {
                rot[c] = Some(r);
            }
        }
        let (d2, d4): (Vec<f64>, Vec<f64>) = (0..f.cell_count())
            .filter_map(|c| Some((f.gradient(c)?, rot[c]?)))
            .map(|(g, r)| {
                let d = (g - r).norm_sq();
                (d * h2, d * d * h2)
            })
            .unzip();
        out.push(RotationMap { shift: (sx, sy), rot, dev2: tree_sum(&d2), dev4: tree_sum(&d4) });
    }
    Ok(out)
}

/// Motions of the components of `Q^{3λ}(p) ∩ U` around one `λ`-point.
#[derive(Clone, Debug)]
pub struct Patch<Mo> {
    pub rect: CellRect,
    /// Motion index per rect cell (row-major in the rect), `u32::MAX` if none.
    label: Vec<u32>,
    pub motions: Vec<Mo>,
    /// Components skipped for insufficient coverage.
    pub uncovered: usize,
}

impl<Mo> Patch<Mo> {
    pub fn motion_for(&self, nx: usize, cell: usize) -> Option<&Mo> {
        let (i, j) = (cell % nx, cell / nx);
        if !self.rect.contains(i, j) {
            return None;
        }
        let l = self.label[(j - self.rect.j0) * self.rect.width() + i - self.rect.i0];
        (l != NONE).then(|| &self.motions[l as usize])
    }
}

#[derive(Clone, Debug)]
pub struct LocalMotions<Mo> {
    pub lambda: usize,
    /// Points per row: `p = (aλ, bλ)` in node units for `a < na`.
    pub na: usize,
    pub nb: usize,
    pub patches: Vec<Patch<Mo>>,
}

impl<Mo> LocalMotions<Mo> {
    pub fn fitted(&self) -> usize {
        self.patches.iter().map(|p| p.motions.len()).sum()
    }

    pub fn uncovered(&self) -> usize {
        self.patches.iter().map(|p| p.uncovered).sum()
    }
}

/// Local motions `M_{p,F}` for every `λ`-point `p` and component `F` of
/// `Q^{3λ}(p) ∩ U`, fitted on `F ∩ W` around the coarse field of the `F ∩ W`
/// cell nearest `p`. Components covering less than `coverage·(2λ)²` cells of
/// `W` get no motion.
pub fn local_motions<M: MotionModel>(
    model: &M,
    f: &DeformationField<f64>,
    w_mask: &[bool],
    u_mask: &[bool],
    coarse: &[Option<Mat2<f64>>],
    lambda: usize,
    coverage: f64,
) -> LocalMotions<M::Motion> {
    let (nx, ny) = (f.nx(), f.ny());
    let na = nx.div_ceil(lambda) + 1;
    let nb = ny.div_ceil(lambda) + 1;
    let need = coverage * (2 * lambda * 2 * lambda) as f64;
    let l = lambda as i64;
    let patches = (0..na * nb)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = ((idx % na) as i64, (idx / na) as i64);
            let (pi, pj) = (a * l, b * l);
            let rect = CellRect::clipped(pi - 3 * l, pj - 3 * l, pi + 3 * l, pj + 3 * l, nx, ny);
            let mut label = vec![NONE; rect.area()];
            let mut motions = Vec::new();
            let mut uncovered = 0;
            for comp in rect_components(nx, &rect, |c| u_mask[c]) {
                let fit: Vec<usize> = comp.iter().copied().filter(|&c| w_mask[c] && f.active[c]).collect();
                if fit.is_empty() || (fit.len() as f64) < need {
                    uncovered += 1;
                    continue;
                }
                let near = fit
                    .iter()
                    .copied()
                    .filter(|&c| coarse[c].is_some())
                    .min_by_key(|&c| {
                        let (i, j) = ((c % nx) as i64, (c / nx) as i64);
                        let (dx, dy) = (2 * i + 1 - 2 * pi, 2 * j + 1 - 2 * pj);
                        (dx * dx + dy * dy, c)
                    });
                let Some(near) = near else {
                    uncovered += 1;
                    continue;
                };
                let m = model.local(f, &fit, coarse[near].expect("filtered"));
                for &c in &comp {
                    let (i, j) = (c % nx, c / nx);
                    label[(j - rect.j0) * rect.width() + i - rect.i0] = motions.len() as u32;
                }
                motions.push(m);
            }
            Patch { rect, label, motions, uncovered }
        })
        .collect();
    LocalMotions { lambda, na, nb, patches }
}

/// Tensor bump profile: 1 for `|t| ≤ 1/4`, 0 for `|t| ≥ 3/4`, smoothstep
/// in between. Translates by 1 sum to one.
#[inline]
pub fn bump(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.25 {
        1.0
    } else if a >= 0.75 {
        0.0
    } else {
        let u = (0.75 - a) / 0.5;
        u * u * (3.0 - 2.0 * u)
    }
}

#[derive(Clone, Debug)]
pub struct Healed {
    /// Corner values of every cell; cells outside `U` or dropped keep theirs.
    pub corners: Vec<[Vec2<f64>; 4]>,
    /// Cells of `U` on which no fitted motion carries weight.
    pub dropped: Vec<usize>,
}

fn healed_value<M: MotionModel>(
    model: &M,
    lm: &LocalMotions<M::Motion>,
    lattice: &Lattice<f64>,
    cell: usize,
    ni: usize,
    nj: usize,
) -> Option<Vec2<f64>> {
    let nx = lattice.nx;
    let lam = lm.lambda as f64;
    let x = lattice.node(ni, nj);
    let around = |n: usize, count: usize| {
        let base = n / lm.lambda;
        (base.saturating_sub(1)..=(base + 1).min(count - 1)).map(move |a| (a, bump((n as f64 - (a * lm.lambda) as f64) / lam)))
    };
    let mut sum = Vec2::zero();
    let mut wsum = 0.0;
    for (b, eb) in around(nj, lm.nb) {
        if eb == 0.0 {
            continue;
        }
        for (a, ea) in around(ni, lm.na) {
            let eta = ea * eb;
            if eta == 0.0 {
                continue;
            }
            if let Some(m) = lm.patches[b * lm.na + a].motion_for(nx, cell) {
                sum += model.apply(m, x).scale(eta);
                wsum += eta;
            }
        }
    }
    (wsum > 0.0).then(|| sum.scale(1.0 / wsum))
}

/// `ỹ = Σ η_p M_p / Σ η_p` on the cells of `U`, evaluated node by node with a
/// fixed order of the contributing points, so that 4-neighbours in `U` agree
/// exactly on shared nodes.
pub fn heal<M: MotionModel>(
    model: &M,
    f: &DeformationField<f64>,
    lm: &LocalMotions<M::Motion>,
    u_mask: &[bool],
) -> Healed {
    let lattice = f.lattice;
    let nx = lattice.nx;
    let vals: Vec<Option<[Vec2<f64>; 4]>> = (0..f.cell_count())
        .into_par_iter()
        .map(|c| {
            if !u_mask[c] || !f.active[c] {
                return None;
            }
            let (i, j) = (c % nx, c / nx);
            let mut out = [Vec2::zero(); 4];
            for (s, (di, dj)) in CORNER_OFFSETS.iter().enumerate() {
                out[s] = healed_value(model, lm, &lattice, c, i + di, j + dj)?;
            }
            Some(out)
        })
        .collect();
    let mut corners = f.corners.clone();
    let mut dropped = Vec::new();
    for (c, v) in vals.into_iter().enumerate() {
        match v {
            Some(v) => corners[c] = v,
            None if u_mask[c] && f.active[c] => dropped.push(c),
            None => {}
        }
    }
    Healed { corners, dropped }
}
