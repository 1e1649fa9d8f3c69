//! Per-piece motions, the extension `ŷ`, the displacement `u` and the
//! rigidity report with its energy accounting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{
    initial_set, run_engine, symbolic_schedule, EngineConfig, EngineOutput, MotionModel, MotionRecord, ScaleSchedule,
};
use crate::error::Result;
use crate::fields::energy::relaxed_density;
use crate::fields::{DeformationField, EnergyBreakdown};
use crate::grid::{set_norm, Edge, NormKind, StarMeasureConfig};
use crate::linalg::Mat2;
use crate::local::fit::{rotation_residual, sample_weight};
use crate::local::{chain_rotation_field, SquareTiling};
use crate::partition::extract::{extract_partition, PieceLabels};
use crate::partition::separator::{jordan_separator, pieces_connected, SeparatorReport};
use crate::scalar::tree_sum;

/// Amplitude below which a jump of `u` counts as numerically closed.
pub const JUMP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceSummary {
    pub id: u32,
    pub cells: usize,
    pub core_cells: usize,
    pub area: f64,
    /// `P(P_j, Ω_ρ)`.
    pub perimeter: f64,
    /// Perimeter including the interface with the excluded set.
    pub perimeter_full: f64,
    pub motion: MotionRecord,
    /// No core, or an empty fit: the piece carries the identity motion.
    pub identity_fill: bool,
}

#[derive(Clone, Debug)]
pub struct CaccioppoliPartition<Mo> {
    pub labels: PieceLabels,
    pub motions: Vec<Mo>,
    pub pieces: Vec<PieceSummary>,
    pub total_perimeter: f64,
}

impl<Mo> CaccioppoliPartition<Mo> {
    pub fn piece_of(&self, cell: usize) -> Option<usize> {
        match self.labels.labels[cell] {
            0 => None,
            l => Some(l as usize - 1),
        }
    }
}

/// Fit one motion per piece on its core cells.
pub fn assign_rigid_motions<M: MotionModel>(
    model: &M,
    healed: &DeformationField<f64>,
    labels: PieceLabels,
) -> CaccioppoliPartition<M::Motion> {
    let (nx, ny) = (labels.nx, labels.ny);
    let h = healed.h();
    let n = nx * ny;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); labels.pieces];
    for c in 0..n {
        if labels.labels[c] > 0 {
            members[labels.labels[c] as usize - 1].push(c);
        }
    }
    let fits: Vec<(M::Motion, bool, usize)> = members
        .par_iter()
        .map(|cells| {
            let core: Vec<usize> = cells.iter().copied().filter(|&c| labels.core[c]).collect();
            match model.fit(healed, &core) {
                Ok(m) if !core.is_empty() => (m, false, core.len()),
                _ => (model.identity(), true, core.len()),
            }
        })
        .collect();

    let mut rel = vec![0usize; labels.pieces];
    let mut full = vec![0usize; labels.pieces];
    for id in 0..Edge::count(nx, ny) {
        let (a, b) = Edge::from_id(id, nx, ny).cells(nx, ny);
        let la = a.map_or(0, |a| labels.labels[a]);
        let lb = b.map_or(0, |b| labels.labels[b]);
        if la == lb {
            continue;
        }
        for (l, other) in [(la, lb), (lb, la)] {
            if l > 0 {
                full[l as usize - 1] += 1;
                if other > 0 {
                    rel[l as usize - 1] += 1;
                }
            }
        }
    }
    let pieces: Vec<PieceSummary> = (0..labels.pieces)
        .map(|k| PieceSummary {
            id: k as u32 + 1,
            cells: members[k].len(),
            core_cells: fits[k].2,
            area: members[k].len() as f64 * h * h,
            perimeter: rel[k] as f64 * h,
            perimeter_full: full[k] as f64 * h,
            motion: model.record(&fits[k].0),
            identity_fill: fits[k].1,
        })
        .collect();
    let total_perimeter = tree_sum(&pieces.iter().map(|p| p.perimeter).collect::<Vec<_>>());
    CaccioppoliPartition { labels, motions: fits.into_iter().map(|f| f.0).collect(), pieces, total_perimeter }
}

/// `ŷ`: the healed field on `Ω̂`, the piece motion on the rest of `Ω_ρ`, the
/// input outside `Ω_ρ`.
pub fn assemble_extension<M: MotionModel>(
    model: &M,
    y: &DeformationField<f64>,
    healed: &DeformationField<f64>,
    p: &CaccioppoliPartition<M::Motion>,
) -> DeformationField<f64> {
    let corners = (0..y.cell_count())
        .map(|c| match p.piece_of(c) {
            None => y.corners[c],
            Some(_) if p.labels.core[c] => healed.corners[c],
            Some(k) => y.corner_positions(c).map(|x| model.apply(&p.motions[k], x)),
        })
        .collect();
    DeformationField::new(y.lattice, corners, y.active.clone())
}

/// `u = ŷ − (R_j x + c_j)` on `P_j`, `0` outside `Ω_ρ`; `ŷ` is returned as
/// `u + (R_j x + c_j)` so that adding the motions back is exact.
pub fn build_displacement<M: MotionModel>(
    model: &M,
    yhat: &DeformationField<f64>,
    p: &CaccioppoliPartition<M::Motion>,
) -> (DeformationField<f64>, DeformationField<f64>) {
    let n = yhat.cell_count();
    let zero = crate::linalg::Vec2::zero();
    let mut u = Vec::with_capacity(n);
    let mut rebuilt = Vec::with_capacity(n);
    for c in 0..n {
        match p.piece_of(c) {
            None => {
                u.push([zero; 4]);
                rebuilt.push(yhat.corners[c]);
            }
            Some(k) => {
                let xs = yhat.corner_positions(c);
                let m: [_; 4] = xs.map(|x| model.apply(&p.motions[k], x));
                let d: [_; 4] = std::array::from_fn(|s| yhat.corners[c][s] - m[s]);
                rebuilt.push(std::array::from_fn(|s| d[s] + m[s]));
                u.push(d);
            }
        }
    }
    (
        DeformationField::new(yhat.lattice, u, yhat.active.clone()),
        DeformationField::new(yhat.lattice, rebuilt, yhat.active.clone()),
    )
}

/// Whether `ŷ − M` then `+ M` is the identity on every piece.
pub fn reconstruction_exact<M: MotionModel>(
    model: &M,
    yhat: &DeformationField<f64>,
    u: &DeformationField<f64>,
    p: &CaccioppoliPartition<M::Motion>,
) -> bool {
    (0..yhat.cell_count()).all(|c| match p.piece_of(c) {
        None => true,
        Some(k) => {
            let xs = yhat.corner_positions(c);
            (0..4).all(|s| u.corners[c][s] + model.apply(&p.motions[k], xs[s]) == yhat.corners[c][s])
        }
    })
}

/// `E_ε` with the model density, on the region, and the relaxed surface term
/// when `ρ` is given.
pub fn model_energy<M: MotionModel>(
    model: &M,
    f: &DeformationField<f64>,
    eps: f64,
    rho: Option<f64>,
    region: Option<&[bool]>,
) -> EnergyBreakdown<f64> {
    let h = f.h();
    let inside = |c: usize| region.map_or(true, |r| r[c]);
    let bulk: Vec<f64> = (0..f.cell_count())
        .filter(|&c| inside(c))
        .filter_map(|c| f.gradient(c))
        .map(|g| model.density(g) * h * h)
        .collect();
    let edges: Vec<usize> = crate::fields::energy::jump_edges_in(f, region).collect();
    let relaxed = rho.map(|r| tree_sum(&edges.iter().map(|&e| relaxed_density(f.jump_amplitude(e), eps, r) * h).collect::<Vec<_>>()));
    EnergyBreakdown {
        bulk: tree_sum(&bulk) / eps,
        surface: edges.len() as f64 * h,
        relaxed_surface: relaxed,
        epsilon: eps,
        rho,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub piece: u32,
    pub components: usize,
    /// `max |R_chain − R_j|²·|U|` over the chain components.
    pub max_gap: f64,
    /// The matching `2(‖∇ŷ − R_chain‖² + ‖∇ŷ − R_j‖²)` on `U`.
    pub bound: f64,
    pub pass: bool,
}

/// Chain-aggregated rotations on `ρ`-squares of each piece core against the
/// piece rotation.
pub fn chain_checks<M: MotionModel>(
    model: &M,
    yhat: &DeformationField<f64>,
    p: &CaccioppoliPartition<M::Motion>,
) -> Vec<ChainCheck> {
    if !model.chains() {
        return Vec::new();
    }
    let (nx, ny) = (p.labels.nx, p.labels.ny);
    let k = (p.labels.opening_side + 1) / 2;
    (0..p.pieces.len())
        .into_par_iter()
        .filter(|&j| !p.pieces[j].identity_fill)
        .filter_map(|j| {
            let id = j as u32 + 1;
            let mask: Vec<bool> = (0..nx * ny).map(|c| p.labels.labels[c] == id && p.labels.core[c]).collect();
            let comps = chain_rotation_field(yhat, &mask, SquareTiling::new(k)).ok()?;
            let rj = model.frame(&p.motions[j]);
            let (mut max_gap, mut bound, mut pass) = (0.0f64, 0.0f64, true);
            for comp in &comps {
                let um = comp.mask(nx, ny);
                let gap = (comp.rotation - rj).norm_sq() * comp.area;
                let b = 2.0 * (comp.deviation + rotation_residual(yhat, &um, rj));
                pass &= gap <= b * (1.0 + 1e-9) + 1e-24;
                if gap >= max_gap {
                    max_gap = gap;
                    bound = b;
                }
            }
            Some(ChainCheck { piece: id, components: comps.len(), max_gap, bound, pass })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetFlag {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpLength {
    /// Edges with both cells in `Ω_ρ`.
    pub interior: f64,
    /// Also the edges of `∂Ω_ρ`, where `u` drops to `0`.
    pub with_boundary: f64,
    /// Raw edge count of `J_u` with no amplitude threshold.
    pub raw_edges: usize,
    pub amplitude_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub u_over_eps: f64,
    pub sym_over_eps: f64,
    pub grad_over_eps_1_eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    /// Cells of `Ω \ Ω_ρ`.
    pub outside_cells: usize,
    /// Cells of `Ω_ρ` outside the core `Ω̂`.
    pub fill_cells: usize,
    pub fill_area: f64,
    /// `fill_area / ρ`.
    pub c_fill: f64,
    pub identity_fill_pieces: usize,
    pub crossed_jump_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub model: String,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub eps: f64,
    pub rho: f64,
    pub eta: f64,
    pub pieces: Vec<PieceSummary>,
    pub total_perimeter: f64,
    pub min_piece_area: f64,
    /// `min |P_j| / ρ`.
    pub area_constant: f64,
    #[serde(rename = "H1_Ju")]
    pub h1_ju: JumpLength,
    #[serde(rename = "u_L2_sq")]
    pub u_l2_sq: f64,
    pub sym_strain_sq: f64,
    pub grad_u_sq: f64,
    pub ratios: Ratios,
    #[serde(rename = "E_eps_y")]
    pub e_eps_y: EnergyBreakdown<f64>,
    #[serde(rename = "E_eps_rho_yhat")]
    pub e_eps_rho_yhat: EnergyBreakdown<f64>,
    /// `max(0, (E_ε^ρ(ŷ, Ω_ρ) − E_ε(y))/ρ)`.
    pub energy_constant: f64,
    /// `Σ ½P(P_j, Ω_ρ)`.
    pub half_perimeter: f64,
    /// `∫_{J_ŷ \ ∂P} f_ε^ρ(|[ŷ]|)` inside `Ω_ρ`.
    pub seam_relaxed: f64,
    /// `max(0, (half_perimeter + seam_relaxed − H¹(J_y))/ρ)`.
    pub part_crack_constant: f64,
    /// `(‖ŷ − y‖², ‖∇ŷ − ∇y‖²)` on the core.
    pub modification_distance: (f64, f64),
    pub excluded: Excluded,
    pub separator: SeparatorSummary,
    pub chains: Vec<ChainCheck>,
    pub engine_steps: usize,
    pub engine_audit: crate::engine::ConservationAudit,
    pub engine_violation: Option<String>,
    pub w_final_star: f64,
    /// Feasibility summary of the symbolic scale schedule.
    pub schedule: Option<ScheduleSummary>,
    pub budget_flags: Vec<BudgetFlag>,
}

/// The symbolic schedule without its per-step table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub norm0: f64,
    pub ln_eps: f64,
    pub ln_kappa: f64,
    pub kappa_auto: bool,
    pub z_bar: u32,
    pub j_star: usize,
    pub j_hat: Option<usize>,
    pub j_stop: Option<usize>,
    pub stop_in_band: bool,
    pub q_identity_defect: f64,
    pub steps: usize,
}

impl ScheduleSummary {
    pub fn new(norm0: f64, s: &ScaleSchedule) -> Self {
        Self {
            norm0,
            ln_eps: s.ln_eps,
            ln_kappa: s.ln_kappa,
            kappa_auto: s.kappa_auto,
            z_bar: s.z_bar,
            j_star: s.j_star,
            j_hat: s.j_hat,
            j_stop: s.j_stop,
            stop_in_band: s.stop_in_band,
            q_identity_defect: s.q_identity_defect,
            steps: s.steps.len(),
        }
    }
}

impl RigidityReport {
    pub fn all_pass(&self) -> bool {
        self.budget_flags.iter().all(|f| f.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// The separator report without its edge list (written separately).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatorSummary {
    pub edges: usize,
    pub length: f64,
    pub c1: f64,
    pub curves: Vec<crate::partition::separator::PieceCurve>,
    pub curves_ok: bool,
    pub faces: usize,
    pub faces_ok: bool,
    pub fill_distance: f64,
    pub c_distance: f64,
    pub graph_components: usize,
    pub dangling_nodes: usize,
    pub connected_ok: bool,
}

impl From<&SeparatorReport> for SeparatorSummary {
    fn from(s: &SeparatorReport) -> Self {
        Self {
            edges: s.edges.len(),
            length: s.length,
            c1: s.c1,
            curves: s.curves.clone(),
            curves_ok: s.curves_ok,
            faces: s.faces,
            faces_ok: s.faces_ok,
            fill_distance: s.fill_distance,
            c_distance: s.c_distance,
            graph_components: s.graph_components,
            dangling_nodes: s.dangling_nodes,
            connected_ok: s.connected_ok,
        }
    }
}

/// Everything a decomposition run produces.
#[derive(Clone, Debug)]
pub struct Decomposition<Mo> {
    pub engine: EngineOutput,
    pub partition: CaccioppoliPartition<Mo>,
    pub separator: SeparatorReport,
    pub yhat: DeformationField<f64>,
    pub u: DeformationField<f64>,
    pub report: RigidityReport,
}

fn l2_sq(f: &DeformationField<f64>, region: &[bool]) -> f64 {
    let w = sample_weight(f.h());
    let v: Vec<f64> = (0..f.cell_count())
        .filter(|&c| region[c] && f.active[c])
        .map(|c| f.corners[c].iter().map(|v| v.norm_sq()).sum::<f64>() * w)
        .collect();
    tree_sum(&v)
}

fn grad_sq(f: &DeformationField<f64>, region: &[bool], op: impl Fn(usize, Mat2<f64>) -> f64) -> f64 {
    let h2 = f.h() * f.h();
    let v: Vec<f64> = (0..f.cell_count())
        .filter(|&c| region[c])
        .filter_map(|c| f.gradient(c).map(|g| op(c, g) * h2))
        .collect();
    tree_sum(&v)
}

fn flag(name: &str, pass: bool, measured: f64, bound: f64) -> BudgetFlag {
    BudgetFlag { name: name.into(), pass, measured, bound }
}

/// The report on consistent inputs.
pub fn report<M: MotionModel>(
    model: &M,
    y: &DeformationField<f64>,
    engine: &EngineOutput,
    p: &CaccioppoliPartition<M::Motion>,
    sep: &SeparatorReport,
    yhat: &DeformationField<f64>,
    u: &DeformationField<f64>,
    cfg: &EngineConfig,
) -> Result<RigidityReport> {
    let (nx, ny) = (y.nx(), y.ny());
    let n = nx * ny;
    let h = y.h();
    let (eps, rho) = (cfg.eps, cfg.rho);
    let om = &p.labels.omega_rho;
    let labels = &p.labels.labels;

    // Jumps of u.
    let (mut interior, mut boundary) = (0usize, 0usize);
    for &e in &u.jumps.edges {
        if u.jump_amplitude(e) <= JUMP_TOL {
            continue;
        }
        let (a, b) = Edge::from_id(e, nx, ny).cells(nx, ny);
        let (ia, ib) = (a.map_or(false, |a| om[a]), b.map_or(false, |b| om[b]));
        if ia && ib {
            interior += 1;
        } else if ia || ib {
            boundary += 1;
        }
    }
    let h1_ju = JumpLength {
        interior: interior as f64 * h,
        with_boundary: (interior + boundary) as f64 * h,
        raw_edges: u.jumps.len(),
        amplitude_tol: JUMP_TOL,
    };

    let u_l2_sq = l2_sq(u, om);
    let frames: Vec<Mat2<f64>> = p.motions.iter().map(|m| model.frame(m)).collect();
    let sym_strain_sq = grad_sq(u, om, |c, g| (frames[labels[c] as usize - 1].transpose() * g).sym().norm_sq());
    let grad_u_sq = grad_sq(u, om, |_, g| g.norm_sq());

    let e_eps_y = model_energy(model, y, eps, None, None);
    let e_eps_rho_yhat = model_energy(model, yhat, eps, Some(rho), Some(om));
    let energy_constant = ((e_eps_rho_yhat.relaxed_total() - e_eps_y.total()) / rho).max(0.0);

    let half_perimeter = 0.5 * p.total_perimeter;
    let seam: Vec<f64> = crate::fields::energy::jump_edges_in(yhat, Some(om))
        .filter(|&e| {
            let (a, b) = Edge::from_id(e, nx, ny).cells(nx, ny);
            labels[a.unwrap()] == labels[b.unwrap()]
        })
        .map(|e| relaxed_density(yhat.jump_amplitude(e), eps, rho) * h)
        .collect();
    let seam_relaxed = tree_sum(&seam);
    let part_crack_constant = ((half_perimeter + seam_relaxed - y.jump_length()) / rho).max(0.0);

    let core = &p.labels.core;
    let diff = yhat.difference(y);
    let modification_distance = (l2_sq(&diff, core), grad_sq(&diff, core, |_, g| g.norm_sq()));

    let fill_cells = (0..n).filter(|&c| om[c] && !core[c]).count();
    let fill_area = fill_cells as f64 * h * h;
    let excluded = Excluded {
        outside_cells: (0..n).filter(|&c| !om[c]).count(),
        fill_cells,
        fill_area,
        c_fill: fill_area / rho,
        identity_fill_pieces: p.pieces.iter().filter(|q| q.identity_fill).count(),
        crossed_jump_cells: p.labels.crossed_jumps,
    };

    let min_piece_area = p.pieces.iter().map(|q| q.area).fold(f64::INFINITY, f64::min);
    let min_piece_area = if p.pieces.is_empty() { 0.0 } else { min_piece_area };

    let chains = chain_checks(model, yhat, p);
    let star = StarMeasureConfig::new(cfg.h_star)?;
    let w_final_star = set_norm(&engine.w, NormKind::Star, star);

    let full: f64 = tree_sum(&p.pieces.iter().map(|q| q.perimeter_full).collect::<Vec<_>>());
    let zero_interface = p.pieces.iter().map(|q| q.perimeter_full - q.perimeter).sum::<f64>();
    let perim_expected = 2.0 * sep.length + zero_interface;
    let every_labelled = (0..n).all(|c| om[c] == (labels[c] > 0));

    let mut budget_flags = vec![
        flag("labels_partition", every_labelled && pieces_connected(&p.labels), p.pieces.len() as f64, 0.0),
        flag("perimeter_consistency", (full - perim_expected).abs() <= 1e-9 * full.max(1.0), full, perim_expected),
        flag("reconstruction_exact", reconstruction_exact(model, yhat, u, p), 0.0, 0.0),
        flag("sym_le_grad", sym_strain_sq <= grad_u_sq * (1.0 + 1e-12) + 1e-300, sym_strain_sq, grad_u_sq),
        flag("separator_jordan", sep.curves_ok, sep.curves.len() as f64, p.pieces.len() as f64),
        flag("separator_faces", sep.faces_ok, sep.faces as f64, p.pieces.len() as f64),
        flag("separator_connected", sep.connected_ok, sep.dangling_nodes as f64, 0.0),
        flag("engine_audit", engine.audit.passes(), engine.audit.final_count as f64, engine.audit.initial as f64),
        flag("engine_budget", engine.violation.is_none(), engine.trace.len() as f64, engine.desk.len() as f64),
    ];
    if !chains.is_empty() {
        let worst = chains.iter().max_by(|a, b| a.max_gap.total_cmp(&b.max_gap)).unwrap();
        budget_flags.push(flag("chain_agreement", chains.iter().all(|c| c.pass), worst.max_gap, worst.bound));
    }

    Ok(RigidityReport {
        model: model.name().into(),
        nx,
        ny,
        h,
        eps,
        rho,
        eta: cfg.eta,
        pieces: p.pieces.clone(),
        total_perimeter: p.total_perimeter,
        min_piece_area,
        area_constant: min_piece_area / rho,
        h1_ju,
        u_l2_sq,
        sym_strain_sq,
        grad_u_sq,
        ratios: Ratios {
            u_over_eps: u_l2_sq / eps,
            sym_over_eps: sym_strain_sq / eps,
            grad_over_eps_1_eta: grad_u_sq / eps.powf(1.0 - cfg.eta),
        },
        e_eps_y,
        e_eps_rho_yhat,
        energy_constant,
        half_perimeter,
        seam_relaxed,
        part_crack_constant,
        modification_distance,
        excluded,
        separator: SeparatorSummary::from(sep),
        chains,
        engine_steps: engine.trace.len(),
        engine_audit: engine.audit.clone(),
        engine_violation: engine.violation.clone(),
        w_final_star,
        schedule: None,
        budget_flags,
    })
}

/// Engine, partition, motions, extension, displacement and report.
pub fn decompose<M: MotionModel>(
    model: &M,
    y: &DeformationField<f64>,
    cfg: &EngineConfig,
) -> Result<Decomposition<M::Motion>> {
    let star = StarMeasureConfig::new(cfg.h_star)?;
    let norm0 = match cfg.norm0 {
        Some(v) => v,
        None => set_norm(&initial_set(y)?, NormKind::Star, star),
    };
    let schedule = symbolic_schedule(cfg, norm0)?;
    let engine = run_engine(model, y, cfg)?;
    let labels = extract_partition(y, &engine.w.mask, cfg.rho);
    let partition = assign_rigid_motions(model, &engine.field, labels);
    let w_norm = set_norm(&engine.w, NormKind::Star, star);
    let separator = jordan_separator(&partition.labels, y.h(), w_norm, cfg.rho, cfg.q_exponent);
    let ext = assemble_extension(model, y, &engine.field, &partition);
    let (u, yhat) = build_displacement(model, &ext, &partition);
    let mut report = report(model, y, &engine, &partition, &separator, &yhat, &u, cfg)?;
    report.schedule = Some(ScheduleSummary::new(norm0, &schedule));
    Ok(Decomposition { engine, partition, separator, yhat, u, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Linear, Rigid};
    use crate::grid::Lattice;
    use crate::linalg::Vec2;

    fn two_piece(n: usize) -> DeformationField<f64> {
        let l = Lattice::with_cell_side(1.0 / n as f64, n, n, Vec2::zero());
        let r = Mat2::rotation(0.3);
        DeformationField::from_fn(l, vec![true; n * n], move |c, x| {
            if c % n >= n / 2 {
                r * x + Vec2::new(0.5, -0.2)
            } else {
                x
            }
        })
    }

    #[test]
    fn rigid_pieces_give_zero_metrics() {
        let f = two_piece(128);
        let d = decompose(&Rigid, &f, &EngineConfig::default()).unwrap();
        let r = &d.report;
        assert_eq!(r.pieces.len(), 2);
        assert!(r.h1_ju.with_boundary <= 1e-9, "{:?}", r.h1_ju);
        assert!(r.u_l2_sq <= 1e-9 && r.sym_strain_sq <= 1e-9 && r.grad_u_sq <= 1e-9);
        assert!(r.all_pass(), "{:?}", r.budget_flags);
        assert_eq!(d.separator.edges.len(), 128 - 2 * (d.partition.labels.omega_rho.iter().position(|&b| b).unwrap() / 128));
    }

    #[test]
    fn linear_kernel_is_recovered() {
        let n = 64;
        let l = Lattice::with_cell_side(1.0 / n as f64, n, n, Vec2::zero());
        let f = DeformationField::from_fn(l, vec![true; n * n], |_, x| Vec2::new(0.01 * x.y + 0.2, -0.01 * x.x));
        let d = decompose(&Linear, &f, &EngineConfig::default()).unwrap();
        assert_eq!(d.report.pieces.len(), 1);
        assert!(d.report.u_l2_sq <= 1e-20 && d.report.grad_u_sq <= 1e-20);
    }
}
