//! JSON field files: nodal values plus explicit two-sided data on jump edges.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::field::{DeformationField, CORNER_OFFSETS};
use crate::grid::{Edge, Lattice, Side};
use crate::linalg::Vec2;

/// Largest mismatch tolerated between the two sides of a non-jump edge.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEdgeRecord {
    pub cell: [usize; 2],
    pub side: Side,
    /// Values at the edge's end nodes (increasing coordinate) seen from `cell`.
    pub minus: [[f64; 2]; 2],
    /// The same nodes seen from the neighbour across `side`.
    pub plus: [[f64; 2]; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub spacing_h: f64,
    pub nx: usize,
    pub ny: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<[f64; 2]>,
    pub values: Vec<[f64; 2]>,
    pub active: Vec<u8>,
    pub jump_edges: Vec<JumpEdgeRecord>,
}

fn neighbour(nx: usize, ny: usize, i: usize, j: usize, side: Side) -> Option<(usize, usize)> {
    match side {
        Side::N => (j + 1 < ny).then(|| (i, j + 1)),
        Side::S => (j > 0).then(|| (i, j - 1)),
        Side::E => (i + 1 < nx).then(|| (i + 1, j)),
        Side::W => (i > 0).then(|| (i - 1, j)),
    }
}

impl FieldFile {
    pub fn from_field(f: &DeformationField<f64>) -> Result<Self> {
        let (nx, ny) = (f.nx(), f.ny());
        let nxn = nx + 1;
        let on_jump = on_jump_corners(f);
        // Prefer a cell whose corner is not on one of its own jump edges.
        let mut values = vec![None::<(bool, Vec2<f64>)>; nxn * (ny + 1)];
        for c in 0..f.cell_count() {
            if !f.active[c] {
                continue;
            }
            let (i, j) = f.lattice.ij(c);
            for (slot, (di, dj)) in CORNER_OFFSETS.iter().enumerate() {
                let node = (j + dj) * nxn + i + di;
                let clean = !on_jump[c][slot];
                match values[node] {
                    Some((true, _)) => {}
                    Some((false, _)) if !clean => {}
                    _ => values[node] = Some((clean, f.corners[c][slot])),
                }
            }
        }
        let mut jump_edges = Vec::new();
        for &e in &f.jumps.edges {
            let edge = Edge::from_id(e, nx, ny);
            let (lo, hi) = edge.cells(nx, ny);
            let (lo, hi) = (lo.expect("jump edge"), hi.expect("jump edge"));
            let side = if edge.is_horizontal() { Side::N } else { Side::E };
            let m = f.side_values(lo, side);
            let p = f.side_values(hi, side.opposite());
            let (i, j) = f.lattice.ij(lo);
            jump_edges.push(JumpEdgeRecord {
                cell: [i, j],
                side,
                minus: [m[0].to_array(), m[1].to_array()],
                plus: [p[0].to_array(), p[1].to_array()],
            });
        }
        let origin = f.lattice.node(0, 0);
        let file = Self {
            spacing_h: f.h(),
            nx,
            ny,
            origin: (origin != Vec2::zero()).then(|| origin.to_array()),
            values: values.into_iter().map(|v| v.map_or([0.0, 0.0], |(_, y)| y.to_array())).collect(),
            active: f.active.iter().map(|&a| a as u8).collect(),
            jump_edges,
        };
        let back = file.clone().into_field()?;
        let same = (0..f.cell_count()).all(|c| !f.active[c] || back.corners[c] == f.corners[c]);
        if !same {
            return Err(invalid("field is not representable by nodal values plus jump edges"));
        }
        Ok(file)
    }

    pub fn into_field(self) -> Result<DeformationField<f64>> {
        let (nx, ny) = (self.nx, self.ny);
        if !(self.spacing_h > 0.0) || nx == 0 || ny == 0 {
            return Err(invalid("field needs spacing_h > 0 and a nonempty grid"));
        }
        if self.values.len() != (nx + 1) * (ny + 1) || self.active.len() != nx * ny {
            return Err(invalid("values or active array has the wrong length"));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite nodal value"));
        }
        let origin = self.origin.map(Vec2::from).unwrap_or_else(Vec2::zero);
        let lattice = Lattice::with_cell_side(self.spacing_h, nx, ny, origin);
        let nxn = nx + 1;
        let mut corners: Vec<[Vec2<f64>; 4]> = (0..nx * ny)
            .map(|c| {
                let (i, j) = (c % nx, c / nx);
                CORNER_OFFSETS.map(|(di, dj)| Vec2::from(self.values[(j + dj) * nxn + i + di]))
            })
            .collect();
        let active: Vec<bool> = self.active.iter().map(|&a| a != 0).collect();
        for rec in &self.jump_edges {
            let [i, j] = rec.cell;
            if i >= nx || j >= ny {
                return Err(invalid(format!("jump edge cell {:?} outside the grid", rec.cell)));
            }
            let Some((ni, nj)) = neighbour(nx, ny, i, j, rec.side) else {
                return Err(invalid(format!("jump edge at {:?} {:?} lies on the grid boundary", rec.cell, rec.side)));
            };
            let a = j * nx + i;
            let b = nj * nx + ni;
            for (k, slot) in rec.side.corner_slots().into_iter().enumerate() {
                corners[a][slot] = Vec2::from(rec.minus[k]);
            }
            for (k, slot) in rec.side.opposite().corner_slots().into_iter().enumerate() {
                corners[b][slot] = Vec2::from(rec.plus[k]);
            }
        }
        let field = DeformationField::new(lattice, corners, active);
        let declared: Vec<usize> = {
            let mut d: Vec<usize> = self
                .jump_edges
                .iter()
                .map(|r| r.side.edge(r.cell[0], r.cell[1]).id(nx, ny))
                .collect();
            d.sort_unstable();
            d.dedup();
            d
        };
        for &e in &field.jumps.edges {
            if declared.binary_search(&e).is_err() {
                let [a, b] = field.jump_at(Edge::from_id(e, nx, ny)).expect("active pair");
                if a.norm().max(b.norm()) > CONTINUITY_TOL {
                    return Err(invalid(format!("undeclared discontinuity across edge {e}")));
                }
            }
        }
        Ok(field)
    }
}

/// For each cell and corner slot, whether that corner is an end node of one
/// of the cell's own jump edges.
fn on_jump_corners(f: &DeformationField<f64>) -> Vec<[bool; 4]> {
    let mut out = vec![[false; 4]; f.cell_count()];
    for c in 0..f.cell_count() {
        let (i, j) = f.lattice.ij(c);
        for side in Side::ALL {
            if f.jumps.contains(side.edge(i, j).id(f.nx(), f.ny())) {
                for slot in side.corner_slots() {
                    out[c][slot] = true;
                }
            }
        }
    }
    out
}

pub fn write_field(path: &Path, f: &DeformationField<f64>) -> Result<()> {
    let file = FieldFile::from_field(f)?;
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<DeformationField<f64>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str::<FieldFile>(&text)?.into_field()
}
