//! Example fields: the bent beam, the beam strip inside a translated body,
//! and random piecewise rigid fields with their ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::{DeformationField, CORNER_OFFSETS};
use crate::grid::Lattice;
use crate::linalg::Vec2;
use crate::local::RigidMotion;

/// `y(x₁, x₂) = (x₂ + 1)(sin x₁, cos x₁)`.
pub fn beam_map(x: Vec2<f64>) -> Vec2<f64> {
    let (s, c) = x.x.sin_cos();
    Vec2::new(s, c).scale(x.y + 1.0)
}

/// Axis-aligned window `(x0, x1) × (y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ambient {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Ambient {
    pub const UNIT: Ambient = Ambient { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    /// Default window around `(0,1) × (0,a)`.
    pub fn around_strip(a: f64) -> Self {
        Ambient { x0: -0.25, x1: 1.25, y0: -0.25, y1: a + 0.25 }
    }
}

fn cells_along(len: f64, h: f64) -> Result<usize> {
    let n = (len / h).round();
    if n < 1.0 || ((n * h - len).abs() > 1e-9 * len.max(1.0)) {
        return Err(invalid(format!("cell side {h} does not divide length {len}")));
    }
    Ok(n as usize)
}

/// Lattice with node indices `(i, j)` at `((i − il)h, (j − jl)h)` and corner
/// values evaluated at those exact positions.
fn indexed_field(
    nx: usize,
    ny: usize,
    il: usize,
    jl: usize,
    h: f64,
    map: impl Fn(usize, Vec2<f64>) -> Vec2<f64>,
) -> DeformationField<f64> {
    let origin = Vec2::new(-(il as f64) * h, -(jl as f64) * h);
    let lattice = Lattice::with_cell_side(h, nx, ny, origin);
    let pos = |i: usize, j: usize| Vec2::new((i as f64 - il as f64) * h, (j as f64 - jl as f64) * h);
    let corners = (0..nx * ny)
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            CORNER_OFFSETS.map(|(di, dj)| map(c, pos(i + di, j + dj)))
        })
        .collect();
    DeformationField::new(lattice, corners, vec![true; nx * ny])
}

/// The beam map on `(0,1) × (0,δ)` at nodes; `h` must divide `1` and `δ`.
pub fn gen_beam(delta: f64, h: f64) -> Result<DeformationField<f64>> {
    if !(delta > 0.0 && h > 0.0 && h <= delta / 8.0 * (1.0 + 1e-12)) {
        return Err(invalid(format!("need 0 < h <= delta/8, got h = {h}, delta = {delta}")));
    }
    let nx = cells_along(1.0, h)?;
    let ny = cells_along(delta, h)?;
    Ok(indexed_field(nx, ny, 0, 0, h, |_, x| beam_map(x)))
}

/// `id + e₂` outside `U = (0,1) × (0, ε^{1/3})` and the beam map inside.
/// Rows are aligned with `x₂ = 0`; `U` is the set of cells whose centre lies in
/// it, so `x₂ = ε^{1/3}` is exact when `h` divides it and `x₁ = 1` is met to
/// within `h/2`.
pub fn gen_twopiece(eps: f64, h: f64, ambient: Ambient) -> Result<DeformationField<f64>> {
    if !(eps > 0.0 && h > 0.0) {
        return Err(invalid("epsilon and h must be positive"));
    }
    let a = eps.cbrt();
    if h > a / 8.0 * (1.0 + 1e-12) {
        return Err(invalid(format!("need h <= eps^(1/3)/8 = {}, got {h}", a / 8.0)));
    }
    if !(ambient.x0 < 0.0 && ambient.x1 > 1.0 && ambient.y0 < 0.0 && ambient.y1 > a) {
        return Err(invalid("ambient window must contain the closed strip"));
    }
    let il = (-ambient.x0 / h).ceil() as usize;
    let jl = (-ambient.y0 / h).ceil() as usize;
    let nx = il + (ambient.x1 / h).ceil() as usize;
    let ny = jl + (ambient.y1 / h).ceil() as usize;
    let in_u = |c: usize| {
        let (i, j) = (c % nx, c / nx);
        let cx = (i as f64 - il as f64 + 0.5) * h;
        let cy = (j as f64 - jl as f64 + 0.5) * h;
        cx > 0.0 && cx < 1.0 && cy > 0.0 && cy < a
    };
    Ok(indexed_field(nx, ny, il, jl, h, |c, x| if in_u(c) { beam_map(x) } else { x + Vec2::new(0.0, 1.0) }))
}

/// `H¹` of the jump set listed for the strip example: `2 + ε^{1/3}`.
pub fn twopiece_jump_length(eps: f64) -> f64 {
    2.0 + eps.cbrt()
}

/// Half-open cell rectangle `[i0, i1) × [j0, j1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

#[derive(Clone, Debug)]
pub struct PiecewiseRigid {
    pub field: DeformationField<f64>,
    /// 1-based ground-truth piece of every cell.
    pub labels: Vec<u32>,
    pub blocks: Vec<Block>,
    pub motions: Vec<RigidMotion<f64>>,
    /// Internal reseeds spent on degenerate draws.
    pub retries: u32,
}

/// Minimal side of a piece, as a fraction of the window side.
pub const MIN_PIECE_FRACTION: f64 = 0.25;
const MAX_RETRIES: u32 = 64;

fn guillotine(rng: &mut ChaCha8Rng, nx: usize, ny: usize, n: usize, min_w: usize, min_h: usize) -> Option<Vec<Block>> {
    let mut blocks = vec![Block { i0: 0, j0: 0, i1: nx, j1: ny }];
    while blocks.len() < n {
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by_key(|&k| {
            let b = blocks[k];
            std::cmp::Reverse((b.i1 - b.i0) * (b.j1 - b.j0))
        });
        let mut split = None;
        for &k in &order {
            let b = blocks[k];
            let (w, hgt) = (b.i1 - b.i0, b.j1 - b.j0);
            let vertical_ok = w >= 2 * min_w;
            let horizontal_ok = hgt >= 2 * min_h;
            let vertical = match (vertical_ok, horizontal_ok) {
                (false, false) => continue,
                (true, false) => true,
                (false, true) => false,
                (true, true) => rng.gen_bool(0.5),
            };
            let (lo, span) = if vertical { (b.i0, w) } else { (b.j0, hgt) };
            let m = if vertical { min_w } else { min_h };
            let cut = lo + rng.gen_range(m..=span - m);
            split = Some((k, vertical, cut));
            break;
        }
        let (k, vertical, cut) = split?;
        let b = blocks[k];
        let (first, second) = if vertical {
            (Block { i1: cut, ..b }, Block { i0: cut, ..b })
        } else {
            (Block { j1: cut, ..b }, Block { j0: cut, ..b })
        };
        blocks[k] = first;
        blocks.push(second);
    }
    Some(blocks)
}

fn random_motion(rng: &mut ChaCha8Rng) -> RigidMotion<f64> {
    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let c = Vec2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    RigidMotion::from_angle(theta, c)
}

/// Smallest jump amplitude over the shared side nodes of two touching blocks.
fn min_interface_gap(blocks: &[Block], motions: &[RigidMotion<f64>], node: impl Fn(usize, usize) -> Vec2<f64>) -> f64 {
    let mut gap = f64::INFINITY;
    for a in 0..blocks.len() {
        for b in a + 1..blocks.len() {
            let (p, q) = (blocks[a], blocks[b]);
            let mut nodes = Vec::new();
            if p.i1 == q.i0 || q.i1 == p.i0 {
                let i = if p.i1 == q.i0 { p.i1 } else { q.i1 };
                for j in p.j0.max(q.j0)..=p.j1.min(q.j1) {
                    if p.j0.max(q.j0) < p.j1.min(q.j1) {
                        nodes.push((i, j));
                    }
                }
            }
            if p.j1 == q.j0 || q.j1 == p.j0 {
                let j = if p.j1 == q.j0 { p.j1 } else { q.j1 };
                for i in p.i0.max(q.i0)..=p.i1.min(q.i1) {
                    if p.i0.max(q.i0) < p.i1.min(q.i1) {
                        nodes.push((i, j));
                    }
                }
            }
            for (i, j) in nodes {
                let x = node(i, j);
                gap = gap.min((motions[a].apply(x) - motions[b].apply(x)).norm());
            }
        }
    }
    gap
}

/// `n` guillotine blocks of the window, each side at least a quarter of the
/// window side, each with a random rigid motion. Draws whose motions nearly
/// agree on a shared side are rejected and redrawn from the same stream.
pub fn gen_piecewise_rigid(seed: u64, n_pieces: usize, ambient: Ambient, h: f64) -> Result<PiecewiseRigid> {
    if n_pieces == 0 {
        return Err(invalid("need at least one piece"));
    }
    let nx = cells_along(ambient.x1 - ambient.x0, h)?;
    let ny = cells_along(ambient.y1 - ambient.y0, h)?;
    let min_w = ((nx as f64 * MIN_PIECE_FRACTION).ceil() as usize).max(1);
    let min_h = ((ny as f64 * MIN_PIECE_FRACTION).ceil() as usize).max(1);
    let node = |i: usize, j: usize| Vec2::new(ambient.x0 + i as f64 * h, ambient.y0 + j as f64 * h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for retries in 0..MAX_RETRIES {
        let Some(blocks) = guillotine(&mut rng, nx, ny, n_pieces, min_w, min_h) else {
            continue;
        };
        let motions: Vec<RigidMotion<f64>> = (0..n_pieces).map(|_| random_motion(&mut rng)).collect();
        if n_pieces > 1 && min_interface_gap(&blocks, &motions, node) < 1e-3 {
            continue;
        }
        let mut labels = vec![0u32; nx * ny];
        for (k, b) in blocks.iter().enumerate() {
            for j in b.j0..b.j1 {
                for i in b.i0..b.i1 {
                    labels[j * nx + i] = k as u32 + 1;
                }
            }
        }
        let lattice = Lattice::with_cell_side(h, nx, ny, Vec2::new(ambient.x0, ambient.y0));
        let corners = (0..nx * ny)
            .map(|c| {
                let (i, j) = (c % nx, c / nx);
                let m = &motions[labels[c] as usize - 1];
                CORNER_OFFSETS.map(|(di, dj)| m.apply(node(i + di, j + dj)))
            })
            .collect();
        let field = DeformationField::new(lattice, corners, vec![true; nx * ny]);
        return Ok(PiecewiseRigid { field, labels, blocks, motions, retries });
    }
    Err(invalid(format!("no admissible draw of {n_pieces} pieces after {MAX_RETRIES} retries")))
}

/// `R x + c + √ε·v(x)` on the unit window with a fixed smooth `v`.
pub fn gen_perturbed_rigid(eps: f64, n: usize, motion: RigidMotion<f64>) -> DeformationField<f64> {
    let h = 1.0 / n as f64;
    let s = eps.sqrt();
    indexed_field(n, n, 0, 0, h, move |_, x| motion.apply(x) + smooth_perturbation(x).scale(s))
}

/// The fixed perturbation `v` used by the scaling probes.
pub fn smooth_perturbation(x: Vec2<f64>) -> Vec2<f64> {
    use std::f64::consts::PI;
    Vec2::new((PI * x.x).sin() * (PI * x.y).cos(), 0.5 * (2.0 * PI * x.x).cos() * x.y * x.y)
}

/// Unit square cut by a full-height slit at `x₁ = 1/2`: the identity on the
/// left, a beam bent to curvature `a`, `(1/a + x₂)(sin a x₁, cos a x₁)`, on
/// the right.
pub fn gen_bent_slit(n: usize, a: f64) -> DeformationField<f64> {
    let h = 1.0 / n as f64;
    indexed_field(n, n, 0, 0, h, move |c, x| {
        if c % n >= n / 2 {
            let (s, co) = (a * x.x).sin_cos();
            Vec2::new(s, co).scale(1.0 / a + x.y)
        } else {
            x
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::cell_energy;

    #[test]
    fn beam_rejects_coarse_grids() {
        assert!(gen_beam(0.1, 0.1 / 4.0).is_err());
        assert!(gen_beam(0.1, 0.1 / 8.0).is_ok());
    }

    #[test]
    fn bottom_fibre_is_rotation() {
        let f = gen_beam(0.1, 0.1 / 16.0).unwrap();
        let g = f.gradient(3).unwrap();
        // Bilinear gradient at the centre of a bottom cell: dist = O(h).
        assert!(crate::linalg::dist_to_so2(g).unwrap() < 0.1 / 16.0);
    }

    #[test]
    fn strip_jump_set_matches_listing() {
        let eps: f64 = 1e-3;
        let h = eps.cbrt() / 8.0;
        let f = gen_twopiece(eps, h, Ambient::around_strip(eps.cbrt())).unwrap();
        assert!((f.jump_length() - twopiece_jump_length(eps)).abs() <= h, "{}", f.jump_length());
        let e = cell_energy(&f, None);
        assert!((e - eps / 3.0).abs() / (eps / 3.0) < 0.05, "{e}");
    }

    #[test]
    fn piecewise_rigid_is_deterministic() {
        let a = gen_piecewise_rigid(11, 5, Ambient::UNIT, 1.0 / 128.0).unwrap();
        let b = gen_piecewise_rigid(11, 5, Ambient::UNIT, 1.0 / 128.0).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.field.corners, b.field.corners);
        for b in &a.blocks {
            assert!(b.i1 - b.i0 >= 32 && b.j1 - b.j0 >= 32);
        }
        let one = gen_piecewise_rigid(3, 1, Ambient::UNIT, 1.0 / 32.0).unwrap();
        assert!(one.field.jumps.is_empty());
    }
}
