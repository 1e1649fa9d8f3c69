//! Pieces from the terminal good set: the `ρ`-interior `Ω_ρ`, the core `Ω̂`
//! (opening of `W ∩ Ω_ρ` by squares of side about `ρ/2`), and a layered fill
//! of the remaining cells of `Ω_ρ`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::fields::DeformationField;
use crate::grid::{connected_components, Edge};

/// Chebyshev distance, in cells, from each cell to the nearest inactive cell
/// or to the outside of the window.
pub fn boundary_distance(nx: usize, ny: usize, active: &[bool]) -> Vec<u32> {
    let mut d: Vec<u32> = (0..nx * ny)
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            if !active[c] {
                0
            } else {
                (i + 1).min(nx - i).min(j + 1).min(ny - j) as u32
            }
        })
        .collect();
    let mut queue: VecDeque<usize> = (0..nx * ny).filter(|&c| !active[c]).collect();
    while let Some(c) = queue.pop_front() {
        let (i, j) = ((c % nx) as i64, (c / nx) as i64);
        for dj in -1..=1 {
            for di in -1..=1 {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                    continue;
                }
                let n = b as usize * nx + a as usize;
                if d[n] > d[c] + 1 {
                    d[n] = d[c] + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    d
}

/// `Ω_ρ`: cells whose centre lies farther than `ρ` from `∂Ω`.
pub fn omega_rho(f: &DeformationField<f64>, rho: f64) -> Vec<bool> {
    let h = f.h();
    boundary_distance(f.nx(), f.ny(), &f.active)
        .into_iter()
        .map(|d| d > 0 && (d as f64 - 0.5) * h > rho)
        .collect()
}

fn prefix(nx: usize, ny: usize, m: &[bool]) -> Vec<u32> {
    let mut p = vec![0u32; (nx + 1) * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            p[(j + 1) * (nx + 1) + i + 1] =
                m[j * nx + i] as u32 + p[j * (nx + 1) + i + 1] + p[(j + 1) * (nx + 1) + i] - p[j * (nx + 1) + i];
        }
    }
    p
}

fn window_sum(p: &[u32], nx: usize, i0: usize, j0: usize, i1: usize, j1: usize) -> u32 {
    let w = nx + 1;
    p[j1 * w + i1] + p[j0 * w + i0] - p[j0 * w + i1] - p[j1 * w + i0]
}

/// Union of all `a × a` cell squares contained in `m`.
pub fn opening(nx: usize, ny: usize, m: &[bool], a: usize) -> Vec<bool> {
    if a == 0 || a > nx || a > ny {
        return vec![false; nx * ny];
    }
    let p = prefix(nx, ny, m);
    let full = (a * a) as u32;
    let mut anchor = vec![false; nx * ny];
    for j in 0..=ny - a {
        for i in 0..=nx - a {
            anchor[j * nx + i] = window_sum(&p, nx, i, j, i + a, j + a) == full;
        }
    }
    let q = prefix(nx, ny, &anchor);
    (0..nx * ny)
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let (i0, j0) = ((i + 1).saturating_sub(a), (j + 1).saturating_sub(a));
            window_sum(&q, nx, i0, j0, i + 1, j + 1) > 0
        })
        .collect()
}

/// Side of the opening squares for `ρ` on cells of side `h`.
pub fn opening_side(rho: f64, h: f64) -> usize {
    ((rho / (2.0 * h)).round() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceLabels {
    pub nx: usize,
    pub ny: usize,
    /// `0` outside `Ω_ρ`, otherwise the 1-based piece id.
    pub labels: Vec<u32>,
    pub omega_rho: Vec<bool>,
    pub core: Vec<bool>,
    /// Number of pieces grown from a core; later pieces are unreached regions.
    pub core_pieces: usize,
    pub pieces: usize,
    pub opening_side: usize,
    /// Cells labelled only once fills were allowed to cross jump edges.
    pub crossed_jumps: usize,
}

impl PieceLabels {
    pub fn cells_of(&self, id: u32) -> Vec<usize> {
        (0..self.labels.len()).filter(|&c| self.labels[c] == id).collect()
    }

    pub fn is_identity_fill(&self, id: u32) -> bool {
        id as usize > self.core_pieces
    }
}

/// Multi-source breadth-first growth, one layer at a time; a cell reached by
/// several labels in the same layer takes the smallest. `blocked(c, d)` forbids
/// the step from `c` to `d`.
fn grow(nx: usize, ny: usize, labels: &mut [u32], allowed: &[bool], blocked: impl Fn(usize, usize) -> bool) -> usize {
    let mut frontier: Vec<usize> = (0..nx * ny).filter(|&c| labels[c] > 0).collect();
    let mut added = 0;
    while !frontier.is_empty() {
        let mut proposals: Vec<(usize, u32)> = Vec::new();
        for &c in &frontier {
            let (i, j) = (c % nx, c / nx);
            let nb = [
                (i > 0).then(|| c - 1),
                (i + 1 < nx).then(|| c + 1),
                (j > 0).then(|| c - nx),
                (j + 1 < ny).then(|| c + nx),
            ];
            for d in nb.into_iter().flatten() {
                if allowed[d] && labels[d] == 0 && !blocked(c, d) {
                    proposals.push((d, labels[c]));
                }
            }
        }
        proposals.sort_unstable();
        proposals.dedup_by_key(|p| p.0);
        frontier.clear();
        for (d, l) in proposals {
            labels[d] = l;
            frontier.push(d);
            added += 1;
        }
    }
    added
}

fn edge_between(nx: usize, ny: usize, c: usize, d: usize) -> usize {
    let (a, b) = (c.min(d), c.max(d));
    let (i, j) = ((a % nx) as u32, (a / nx) as u32);
    if b == a + 1 {
        Edge::V { i: i + 1, j }.id(nx, ny)
    } else {
        Edge::H { i, j: j + 1 }.id(nx, ny)
    }
}

/// Label `Ω_ρ` from the terminal good set `w_mask`. Fills first grow without
/// crossing jump edges of `y`, then freely; what remains becomes separate
/// unreached pieces.
pub fn extract_partition(y: &DeformationField<f64>, w_mask: &[bool], rho: f64) -> PieceLabels {
    let (nx, ny) = (y.nx(), y.ny());
    let n = nx * ny;
    let om = omega_rho(y, rho);
    let a = opening_side(rho, y.h());
    let good: Vec<bool> = (0..n).map(|c| om[c] && w_mask[c] && y.active[c]).collect();
    let core = opening(nx, ny, &good, a);
    let mut labels = vec![0u32; n];
    let cores = connected_components(nx, ny, &core);
    for (k, comp) in cores.iter().enumerate() {
        for &c in comp {
            labels[c] = k as u32 + 1;
        }
    }
    let core_pieces = cores.len();
    grow(nx, ny, &mut labels, &om, |c, d| y.jumps.contains(edge_between(nx, ny, c, d)));
    let crossed_jumps = grow(nx, ny, &mut labels, &om, |_, _| false);
    let rest: Vec<bool> = (0..n).map(|c| om[c] && labels[c] == 0).collect();
    let mut pieces = core_pieces;
    for comp in connected_components(nx, ny, &rest) {
        pieces += 1;
        for c in comp {
            labels[c] = pieces as u32;
        }
    }
    PieceLabels { nx, ny, labels, omega_rho: om, core, core_pieces, pieces, opening_side: a, crossed_jumps }
}
