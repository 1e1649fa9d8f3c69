//! End-to-end runs writing the report, partition, separator and trace files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, Linear, MotionModel, Rigid};
use crate::error::{Error, Result};
use crate::fields::{read_field, DeformationField};
use crate::harness::generators::{gen_bent_slit, gen_perturbed_rigid, gen_piecewise_rigid, gen_twopiece, Ambient};
use crate::local::RigidMotion;
use crate::linalg::Vec2;
use crate::partition::output::{write_labels, write_motions, write_report, write_separator, write_trace};
use crate::partition::{decompose, Decomposition, RigidityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
        Error::Budget(_) => EXIT_BUDGET,
        _ => EXIT_INFEASIBLE,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Rigid,
    Linear,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rigid" => Ok(Self::Rigid),
            "linear" => Ok(Self::Linear),
            _ => Err(Error::Invalid(format!("unknown model {s:?}"))),
        }
    }
}

pub fn read_config(path: &Path) -> Result<EngineConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("config {}: {e}", path.display())))
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputFiles {
    pub report: PathBuf,
    pub labels: PathBuf,
    pub motions: PathBuf,
    pub separator: PathBuf,
    pub trace: PathBuf,
}

impl OutputFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            report: dir.join("report.json"),
            labels: dir.join("labels.csv"),
            motions: dir.join("motions.json"),
            separator: dir.join("separator.csv"),
            trace: dir.join("trace.jsonl"),
        }
    }
}

pub fn write_outputs<Mo>(dir: &Path, d: &Decomposition<Mo>) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir)?;
    let files = OutputFiles::in_dir(dir);
    write_report(&files.report, &d.report)?;
    write_labels(&files.labels, &d.partition.labels)?;
    write_motions(&files.motions, &d.partition.pieces)?;
    write_separator(&files.separator, d.partition.labels.nx, d.partition.labels.ny, &d.separator.edges)?;
    write_trace(&files.trace, &d.engine.trace)?;
    Ok(files)
}

fn decompose_with<M: MotionModel>(
    model: &M,
    y: &DeformationField<f64>,
    cfg: &EngineConfig,
    out: Option<&Path>,
) -> Result<(RigidityReport, Option<OutputFiles>)> {
    let d = decompose(model, y, cfg)?;
    let files = out.map(|dir| write_outputs(dir, &d)).transpose()?;
    Ok((d.report, files))
}

#[derive(Clone, Debug)]
pub struct DecomposeOutcome {
    pub report: RigidityReport,
    pub files: Option<OutputFiles>,
    pub exit: i32,
}

/// Decompose a field, writing the outputs when `out` is given. A failed
/// budget flag gives exit code 4 with the files still written.
pub fn run_field(y: &DeformationField<f64>, kind: ModelKind, cfg: &EngineConfig, out: Option<&Path>) -> Result<DecomposeOutcome> {
    let (report, files) = match kind {
        ModelKind::Rigid => decompose_with(&Rigid, y, cfg, out)?,
        ModelKind::Linear => decompose_with(&Linear, y, cfg, out)?,
    };
    let exit = if report.all_pass() { EXIT_OK } else { EXIT_BUDGET };
    Ok(DecomposeOutcome { report, files, exit })
}

pub fn run_decompose(input: &Path, kind: ModelKind, cfg: &EngineConfig, out: &Path) -> Result<DecomposeOutcome> {
    let y = read_field(input)?;
    run_field(&y, kind, cfg, Some(out))
}

/// A named input of the frozen regression corpus.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub field: DeformationField<f64>,
    pub config: EngineConfig,
}

/// Five fixed instances: a rigid body, a three-piece rigid field, the strip
/// example, a perturbed rigid body and a bent half behind a slit.
pub fn frozen_corpus() -> Result<Vec<CorpusEntry>> {
    let base = EngineConfig::default();
    let rigid = gen_perturbed_rigid(0.0, 64, RigidMotion::from_angle(0.4, Vec2::new(0.3, -0.1)));
    let pw = gen_piecewise_rigid(7, 3, Ambient::UNIT, 1.0 / 128.0)?.field;
    let eps_strip = 1e-4;
    let a = f64::cbrt(eps_strip);
    let strip = gen_twopiece(eps_strip, a / 8.0, Ambient::around_strip(a))?;
    let eps_pert = 1e-4;
    let pert = gen_perturbed_rigid(eps_pert, 128, RigidMotion::from_angle(-0.7, Vec2::new(0.1, 0.2)));
    let bent = gen_bent_slit(128, 0.01);
    Ok(vec![
        CorpusEntry { name: "rigid", field: rigid, config: base.clone() },
        CorpusEntry { name: "pwrigid3", field: pw, config: base.clone() },
        CorpusEntry { name: "strip", field: strip, config: EngineConfig { eps: eps_strip, ..base.clone() } },
        CorpusEntry { name: "perturbed", field: pert, config: EngineConfig { eps: eps_pert, ..base.clone() } },
        CorpusEntry { name: "bent_slit", field: bent, config: base },
    ])
}
