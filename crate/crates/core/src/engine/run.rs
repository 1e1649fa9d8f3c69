//! The multiscale iteration on the desk schedule.

use serde::{Deserialize, Serialize};

use crate::engine::config::EngineConfig;
use crate::engine::model::MotionModel;
use crate::engine::schedule::{desk_schedule, DeskStep};
use crate::engine::step::{heal, local_motions, rotation_maps, select_carving};
use crate::error::{Error, Result};
use crate::fields::DeformationField;
use crate::grid::modify::bounding_rect;
use crate::grid::{
    fill_holes, measure_infty, merge_small_components, rectangleize, set_norm, subtract_and_mark, GridSet, MergeRule,
    NormKind, StarMeasureConfig,
};
use crate::local::harmonic_split;
use crate::scalar::tree_sum;

/// One line of the JSONL trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub j: usize,
    pub s_j: f64,
    pub eps_j: f64,
    pub k_j: f64,
    pub lambda_j: f64,
    /// `‖W_j‖_*` entering the step.
    pub beta: f64,
    /// Bulk energy `∫_{W_j}` of the model density entering the step.
    pub gamma: f64,
    /// Mean over the four shifts of `‖∇w − R̂_i‖²_{L²(W)}`.
    pub alpha: f64,
    pub carved_cells: usize,
    /// `‖W_{j+1}‖_*` after the step.
    pub star_norm: f64,
    pub filled: usize,
    pub carved_squares: usize,
    /// `Σ|∂Q|_*` over the carved squares.
    pub carve_boundary: f64,
    /// `8γ_J/ε_j`.
    pub carve_budget: f64,
    pub rectangles: usize,
    pub rectangle_cells: usize,
    /// Measured `c` of the rectangle replacement, `None` if it was skipped.
    pub rectangle_c: Option<f64>,
    pub dropped: usize,
    pub harmonic_iterations: usize,
    pub harmonic_fallback: bool,
    /// `‖∇w − R̂_i‖² / γ` per shift.
    pub rotation_ratio: Vec<Option<f64>>,
    /// `‖∇w − R̂_i‖⁴_{L⁴} / γ` per shift.
    pub rotation_ratio4: Vec<Option<f64>>,
    pub motions_fitted: usize,
    pub motions_uncovered: usize,
    pub jump_length: f64,
}

/// Cell-by-cell account of `W_0 \ W_final` against the per-step changes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationAudit {
    pub initial: usize,
    pub final_count: usize,
    pub carved: usize,
    pub rectangled: usize,
    pub dropped: usize,
    pub filled: usize,
    /// Every cell's membership is explained by its recorded events.
    pub consistent: bool,
    /// The active set of the field never changed.
    pub active_unchanged: bool,
}

impl ConservationAudit {
    pub fn passes(&self) -> bool {
        self.consistent
            && self.active_unchanged
            && self.initial + self.filled == self.final_count + self.carved + self.rectangled + self.dropped
    }
}

#[derive(Clone, Debug)]
pub struct EngineOutput {
    pub field: DeformationField<f64>,
    pub w0: GridSet<f64>,
    pub w: GridSet<f64>,
    pub desk: Vec<DeskStep>,
    pub trace: Vec<TraceRecord>,
    pub audit: ConservationAudit,
    /// First budget assertion that failed; the run stops there.
    pub violation: Option<String>,
}

/// `W_0`: active cells not adjacent to a jump edge.
pub fn initial_set(f: &DeformationField<f64>) -> Result<GridSet<f64>> {
    let adj = f.jump_adjacent();
    let mask: Vec<bool> = f.active.iter().zip(&adj).map(|(&a, &j)| a && !j).collect();
    GridSet::extract_components(mask, f.lattice)
}

fn model_energy<M: MotionModel>(model: &M, f: &DeformationField<f64>, mask: &[bool]) -> f64 {
    let h2 = f.h() * f.h();
    let v: Vec<f64> = (0..f.cell_count())
        .filter(|&c| mask[c])
        .filter_map(|c| f.gradient(c))
        .map(|g| model.density(g) * h2)
        .collect();
    tree_sum(&v)
}

struct Events {
    removed: Vec<u32>,
    added: Vec<u32>,
}

impl Events {
    fn record(&mut self, before: &[bool], after: &[bool]) -> (usize, usize) {
        let (mut r, mut a) = (0, 0);
        for c in 0..before.len() {
            if before[c] && !after[c] {
                self.removed[c] += 1;
                r += 1;
            } else if !before[c] && after[c] {
                self.added[c] += 1;
                a += 1;
            }
        }
        (r, a)
    }
}

pub fn run_engine<M: MotionModel>(model: &M, input: &DeformationField<f64>, cfg: &EngineConfig) -> Result<EngineOutput> {
    cfg.validate()?;
    let star = StarMeasureConfig::new(cfg.h_star)?;
    let h = input.h();
    let n = input.cell_count();
    let nx = input.nx();
    let desk = desk_schedule(cfg, h);
    let w0 = initial_set(input)?;
    let mut field = input.clone();
    let mut w = w0.clone();
    let mut trace = Vec::with_capacity(desk.len());
    let mut ev = Events { removed: vec![0; n], added: vec![0; n] };
    let mut audit = ConservationAudit { initial: w0.cell_count(), ..Default::default() };
    let mut violation = None;

    for step in &desk {
        let beta = set_norm(&w, NormKind::Star, star);
        let gamma = model_energy(model, &field, &w.mask);

        // Carve high-energy squares.
        let carve = select_carving(model, &field, &w.mask, step.k_cells, step.eps, cfg.threshold_c, cfg.h_star);
        let carve_budget = 8.0 * carve.gamma / step.eps;
        if !carve.within_budget(step.eps) {
            violation = Some(format!(
                "step {}: carved boundary {:.6e} exceeds 8 gamma_J / eps_j = {:.6e}",
                step.j, carve.boundary_star, carve_budget
            ));
        }
        let before = w.mask.clone();
        w = subtract_and_mark(&w, &carve.cells(nx))?;
        let (carved_cells, _) = ev.record(&before, &w.mask);
        audit.carved += carved_cells;

        // Merge touching components, one of which is small.
        w = merge_small_components(&w, step.k, MergeRule::AnySmall);

        // Replace mid-size interior components by their rectangle hulls.
        let hulls: Vec<_> = w
            .interior()
            .filter(|&k| {
                let m = measure_infty(&w.lattice, &w.gamma(k));
                m > step.lambda && m <= step.k
            })
            .map(|k| (k, bounding_rect(nx, &w.components[k].cells)))
            .collect();
        let mut rectangle_c = None;
        let mut rectangle_cells = 0;
        if !hulls.is_empty() {
            match rectangleize(&w, &hulls, step.t, star) {
                Ok(r) => {
                    let before = w.mask.clone();
                    w = r.set;
                    let (rm, _) = ev.record(&before, &w.mask);
                    rectangle_cells = rm;
                    audit.rectangled += rm;
                    rectangle_c = Some(r.c_measured);
                }
                Err(Error::Precondition(_)) => {}
                Err(e) => return Err(e),
            }
        }

        // Harmonic part on W.
        let inside: Vec<bool> = (0..n).map(|c| w.mask[c] && field.active[c]).collect();
        let (wfield, harmonic_iterations, harmonic_fallback) = if inside.iter().any(|&b| b) {
            match harmonic_split(&field, &inside) {
                Ok(s) => (s.w, s.iterations, false),
                Err(Error::Precondition(_)) | Err(Error::NoConvergence(_)) => (field.clone(), 0, true),
                Err(e) => return Err(e),
            }
        } else {
            (field.clone(), 0, false)
        };

        // Coarse fields on the four shifted k-lattices.
        let maps = rotation_maps(model, &wfield, &inside, step.k_cells)?;
        let alpha = maps.iter().map(|m| m.dev2).sum::<f64>() / 4.0;
        let ratio = |v: f64| (gamma > 0.0).then(|| v / gamma);
        let rotation_ratio = maps.iter().map(|m| ratio(m.dev2)).collect();
        let rotation_ratio4 = maps.iter().map(|m| ratio(m.dev4)).collect();

        // Local motions on the λ-points and healing on U = H^λ(W).
        let u = fill_holes(&w, Some(step.lambda));
        let lm = local_motions(model, &wfield, &inside, &u.mask, &maps[3].rot, step.lambda_cells, cfg.coverage);
        let healed = heal(model, &field, &lm, &u.mask);
        let before = w.mask.clone();
        let mut leave = healed.dropped.clone();
        leave.extend((0..n).filter(|&c| u.mask[c] && !field.active[c]));
        w = subtract_and_mark(&u, &leave)?;
        let mut grown = before.clone();
        for c in 0..n {
            grown[c] = grown[c] || u.mask[c];
        }
        let (_, filled) = ev.record(&before, &grown);
        let (dropped, _) = ev.record(&grown, &w.mask);
        audit.filled += filled;
        audit.dropped += dropped;
        field = DeformationField::new(field.lattice, healed.corners, field.active.clone());

        let star_norm = set_norm(&w, NormKind::Star, star);
        let allowed = (1.0 + cfg.budget_c1 * step.t) * (beta + carve.boundary_star);
        if violation.is_none() && star_norm > allowed * (1.0 + 1e-12) + 1e-12 * h {
            violation = Some(format!(
                "step {}: star norm {:.6e} exceeds (1 + C1 t)(beta + carved boundary) = {:.6e}",
                step.j, star_norm, allowed
            ));
        }
        trace.push(TraceRecord {
            j: step.j,
            s_j: step.s,
            eps_j: step.eps,
            k_j: step.k,
            lambda_j: step.lambda,
            beta,
            gamma,
            alpha,
            carved_cells,
            star_norm,
            filled,
            carved_squares: carve.squares.len(),
            carve_boundary: carve.boundary_star,
            carve_budget,
            rectangles: hulls.len(),
            rectangle_cells,
            rectangle_c,
            dropped,
            harmonic_iterations,
            harmonic_fallback,
            rotation_ratio,
            rotation_ratio4,
            motions_fitted: lm.fitted(),
            motions_uncovered: lm.uncovered(),
            jump_length: field.jump_length(),
        });
        if violation.is_some() {
            break;
        }
    }

    audit.final_count = w.cell_count();
    audit.active_unchanged = field.active == input.active;
    audit.consistent = (0..n).all(|c| {
        let net = w0.mask[c] as i64 + ev.added[c] as i64 - ev.removed[c] as i64;
        net == w.mask[c] as i64
    });
    Ok(EngineOutput { field, w0, w, desk, trace, audit, violation })
}
