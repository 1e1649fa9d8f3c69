//! Portable output files of a decomposition.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::engine::{MotionRecord, TraceRecord};
use crate::error::Result;
use crate::grid::Edge;
use crate::partition::extract::PieceLabels;
use crate::partition::report::{PieceSummary, RigidityReport};

/// Label grid as CSV, one row per lattice row `j`, starting at `j = 0`.
pub fn write_labels(path: &Path, labels: &PieceLabels) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in labels.labels.chunks(labels.nx) {
        w.write_record(row.iter().map(|l| l.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<Vec<u32>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push(
            rec.iter()
                .map(|s| s.trim().parse::<u32>().map_err(|e| crate::error::invalid(format!("label {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(out)
}

pub fn write_motions(path: &Path, pieces: &[PieceSummary]) -> Result<()> {
    let motions: Vec<MotionRecord> = pieces.iter().map(|p| p.motion).collect();
    std::fs::write(path, serde_json::to_string_pretty(&motions)? + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct EdgeRow {
    id: usize,
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

/// Separator edges as node-index pairs.
pub fn write_separator(path: &Path, nx: usize, ny: usize, edges: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for &id in edges {
        let [(x0, y0), (x1, y1)] = Edge::from_id(id, nx, ny).nodes();
        w.serialize(EdgeRow { id, x0, y0, x1, y1 })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for t in trace {
        serde_json::to_writer(&mut f, t)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_report(path: &Path, r: &RigidityReport) -> Result<()> {
    std::fs::write(path, r.to_json()? + "\n")?;
    Ok(())
}
