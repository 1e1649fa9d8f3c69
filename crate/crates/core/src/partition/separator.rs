//! The separator `S` (label changes inside `Ω_ρ`) and the checkable
//! analogues of its curve properties.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::grid::{connected_components, Edge};
use crate::partition::extract::PieceLabels;

/// Edges with exactly one side in the set; window-boundary edges of member
/// cells included.
pub fn boundary_edges(nx: usize, ny: usize, member: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut out = Vec::new();
    for id in 0..Edge::count(nx, ny) {
        let (a, b) = Edge::from_id(id, nx, ny).cells(nx, ny);
        let ma = a.map_or(false, &member);
        let mb = b.map_or(false, &member);
        if ma != mb {
            out.push(id);
        }
    }
    out
}

/// Cells enclosed by an edge set with the even-odd rule (rays to the west).
pub fn enclosed_cells(nx: usize, ny: usize, edges: &[usize]) -> Vec<bool> {
    let mut vertical = vec![false; (nx + 1) * ny];
    for &id in edges {
        if let Edge::V { i, j } = Edge::from_id(id, nx, ny) {
            vertical[j as usize * (nx + 1) + i as usize] ^= true;
        }
    }
    let mut out = vec![false; nx * ny];
    for j in 0..ny {
        let mut inside = false;
        for i in 0..nx {
            inside ^= vertical[j * (nx + 1) + i];
            out[j * nx + i] = inside;
        }
    }
    out
}

/// Node-connected components of an edge set and the number of nodes of odd
/// degree 1 (dangling ends).
pub fn edge_graph(nx: usize, ny: usize, edges: &[usize]) -> (usize, usize) {
    let nn = (nx + 1) * (ny + 1);
    let mut parent: Vec<usize> = (0..nn).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut degree = vec![0u32; nn];
    for &id in edges {
        let [(i0, j0), (i1, j1)] = Edge::from_id(id, nx, ny).nodes();
        let (a, b) = (j0 * (nx + 1) + i0, j1 * (nx + 1) + i1);
        degree[a] += 1;
        degree[b] += 1;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut roots: Vec<usize> = (0..nn).filter(|&x| degree[x] > 0).map(|x| find(&mut parent, x)).collect();
    roots.sort_unstable();
    roots.dedup();
    (roots.len(), degree.iter().filter(|&&d| d == 1).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceCurve {
    pub piece: u32,
    /// Closed edge loops of `∂P`: the outer curve plus `m` inner loops.
    pub loops: usize,
    /// The enclosed region meets `Ω̂` exactly in the piece.
    pub jordan: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatorReport {
    /// Sorted edge ids of `S`.
    pub edges: Vec<usize>,
    pub length: f64,
    /// `max(0, (H¹(S) − ‖W‖_*)/ρ)`.
    pub c1: f64,
    pub curves: Vec<PieceCurve>,
    pub curves_ok: bool,
    /// Faces of `Ω_ρ` cut along `S`.
    pub faces: usize,
    /// Every face is exactly one whole piece.
    pub faces_ok: bool,
    /// Largest distance from a non-core cell of `Ω_ρ` to `S ∪ ∂Ω_ρ`.
    pub fill_distance: f64,
    /// `fill_distance / ρ^{q−2}`.
    pub c_distance: f64,
    pub graph_components: usize,
    pub dangling_nodes: usize,
    pub connected_ok: bool,
}

/// Separator edges: both sides in `Ω_ρ` with different labels.
pub fn separator_edges(p: &PieceLabels) -> Vec<usize> {
    let (nx, ny) = (p.nx, p.ny);
    (0..Edge::count(nx, ny))
        .filter(|&id| match Edge::from_id(id, nx, ny).cells(nx, ny) {
            (Some(a), Some(b)) => p.omega_rho[a] && p.omega_rho[b] && p.labels[a] != p.labels[b],
            _ => false,
        })
        .collect()
}

pub fn jordan_separator(p: &PieceLabels, h: f64, w_norm: f64, rho: f64, q_exponent: u32) -> SeparatorReport {
    let (nx, ny) = (p.nx, p.ny);
    let n = nx * ny;
    let edges = separator_edges(p);
    let length = edges.len() as f64 * h;
    let c1 = ((length - w_norm) / rho).max(0.0);

    let mut curves = Vec::with_capacity(p.pieces);
    for id in 1..=p.pieces as u32 {
        let bd = boundary_edges(nx, ny, |c| p.labels[c] == id);
        let inside = enclosed_cells(nx, ny, &bd);
        let jordan = (0..n).all(|c| inside[c] == (p.labels[c] == id));
        let (loops, _) = edge_graph(nx, ny, &bd);
        curves.push(PieceCurve { piece: id, loops, jordan });
    }
    let curves_ok = curves.iter().all(|c| c.jordan);

    let mut in_s = vec![false; Edge::count(nx, ny)];
    for &e in &edges {
        in_s[e] = true;
    }
    let mut face = vec![u32::MAX; n];
    let mut faces = 0u32;
    let mut faces_ok = true;
    let mut face_labels: Vec<u32> = Vec::new();
    for start in 0..n {
        if !p.omega_rho[start] || face[start] != u32::MAX {
            continue;
        }
        face[start] = faces;
        face_labels.push(p.labels[start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let (i, j) = (c % nx, c / nx);
            let steps = [
                (i > 0).then(|| (c - 1, Edge::V { i: i as u32, j: j as u32 })),
                (i + 1 < nx).then(|| (c + 1, Edge::V { i: i as u32 + 1, j: j as u32 })),
                (j > 0).then(|| (c - nx, Edge::H { i: i as u32, j: j as u32 })),
                (j + 1 < ny).then(|| (c + nx, Edge::H { i: i as u32, j: j as u32 + 1 })),
            ];
            for (d, e) in steps.into_iter().flatten() {
                if p.omega_rho[d] && face[d] == u32::MAX && !in_s[e.id(nx, ny)] {
                    face[d] = faces;
                    if p.labels[d] != p.labels[start] {
                        faces_ok = false;
                    }
                    queue.push_back(d);
                }
            }
        }
        faces += 1;
    }
    let mut seen_labels = face_labels.clone();
    seen_labels.sort_unstable();
    seen_labels.dedup();
    faces_ok &= seen_labels.len() == face_labels.len() && face_labels.len() == p.pieces;

    let rho_boundary = boundary_edges(nx, ny, |c| p.omega_rho[c]);
    let mut seeds = vec![false; n];
    for &e in edges.iter().chain(&rho_boundary) {
        let (a, b) = Edge::from_id(e, nx, ny).cells(nx, ny);
        for c in [a, b].into_iter().flatten() {
            if p.omega_rho[c] {
                seeds[c] = true;
            }
        }
    }
    let dist = chebyshev_from(nx, ny, &seeds);
    let fill_cells: Vec<usize> = (0..n).filter(|&c| p.omega_rho[c] && !p.core[c]).collect();
    let fill_distance = fill_cells.iter().map(|&c| dist[c]).max().map_or(0.0, |d| d as f64 * h);
    let c_distance = fill_distance / rho.powi(q_exponent as i32 - 2);

    let mut graph: Vec<usize> = edges.iter().chain(&rho_boundary).copied().collect();
    graph.sort_unstable();
    graph.dedup();
    let (graph_components, dangling_nodes) = edge_graph(nx, ny, &graph);

    SeparatorReport {
        edges,
        length,
        c1,
        curves,
        curves_ok,
        faces: faces as usize,
        faces_ok,
        fill_distance,
        c_distance,
        graph_components,
        dangling_nodes,
        connected_ok: dangling_nodes == 0,
    }
}

/// Chebyshev distance in cells to the nearest seed (`u32::MAX` if none).
pub fn chebyshev_from(nx: usize, ny: usize, seeds: &[bool]) -> Vec<u32> {
    let mut d = vec![u32::MAX; nx * ny];
    let mut queue = VecDeque::new();
    for c in 0..nx * ny {
        if seeds[c] {
            d[c] = 0;
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        let (i, j) = ((c % nx) as i64, (c / nx) as i64);
        for dj in -1..=1 {
            for di in -1..=1 {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                    continue;
                }
                let m = b as usize * nx + a as usize;
                if d[m] == u32::MAX {
                    d[m] = d[c] + 1;
                    queue.push_back(m);
                }
            }
        }
    }
    d
}

/// Whether each piece is 4-connected.
pub fn pieces_connected(p: &PieceLabels) -> bool {
    (1..=p.pieces as u32).all(|id| {
        let sel: Vec<bool> = p.labels.iter().map(|&l| l == id).collect();
        connected_components(p.nx, p.ny, &sel).len() == 1
    })
}
