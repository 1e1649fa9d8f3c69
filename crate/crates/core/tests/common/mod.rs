#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbv_rigidity::grid::Edge;
use sbv_rigidity::{DeformationField, GridSet, Lattice, Vec2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-square lattice with `n` cells per side; `n` a power of two keeps
/// every edge-count sum exact.
pub fn unit(n: usize) -> Lattice {
    Lattice::with_cell_side(1.0 / n as f64, n, n, Vec2::zero())
}

/// Smooth random map plus constant offsets on random blocks, some of them
/// tiny, so the jump set has both large and sub-threshold openings.
pub fn random_field(r: &mut impl Rng, n: usize) -> DeformationField {
    let l = unit(n);
    let (a, b, c) = (r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3), r.gen_range(0.5..3.0));
    let mut offset = vec![Vec2::zero(); n * n];
    for _ in 0..r.gen_range(0..6) {
        let (i0, j0) = (r.gen_range(0..n), r.gen_range(0..n));
        let (w, hh) = (r.gen_range(1..=n / 2), r.gen_range(1..=n / 2));
        let amp = if r.gen_bool(0.5) { 1e-7 } else { 0.3 };
        let d = Vec2::new(r.gen_range(-amp..amp), r.gen_range(-amp..amp));
        for j in j0..(j0 + hh).min(n) {
            for i in i0..(i0 + w).min(n) {
                offset[j * n + i] = offset[j * n + i] + d;
            }
        }
    }
    let active = (0..n * n).map(|_| r.gen_bool(0.97)).collect();
    DeformationField::from_fn(l, active, |cell, x| {
        Vec2::new(x.x + a * (c * x.y).sin(), x.y + b * (c * x.x).cos()) + offset[cell]
    })
}

pub fn random_region(r: &mut impl Rng, cells: usize, fill: f64) -> Vec<bool> {
    let mut m: Vec<bool> = (0..cells).map(|_| r.gen_bool(fill)).collect();
    m[r.gen_range(0..cells)] = true;
    m
}

/// A set `W` on an `n × n` lattice with random rectangular holes, some of
/// them touching each other or the window.
pub fn random_set(r: &mut impl Rng, n: usize, holes: usize) -> GridSet {
    let mut mask = vec![true; n * n];
    for _ in 0..holes {
        let (w, hh) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let (i0, j0) = (r.gen_range(0..n - w), r.gen_range(0..n - hh));
        for j in j0..j0 + hh {
            for i in i0..i0 + w {
                mask[j * n + i] = false;
            }
        }
    }
    GridSet::extract_components(mask, unit(n)).unwrap()
}

pub fn h_edge(i: usize, j: usize, nx: usize, ny: usize) -> usize {
    Edge::H { i: i as u32, j: j as u32 }.id(nx, ny)
}

pub fn v_edge(i: usize, j: usize, nx: usize, ny: usize) -> usize {
    Edge::V { i: i as u32, j: j as u32 }.id(nx, ny)
}
