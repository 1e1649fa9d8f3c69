//! Acceptance criteria, one PASS/FAIL line each on stderr (written past the
//! test harness capture so the lines always show).

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbv_rigidity::engine::step::select_carving;
use sbv_rigidity::engine::{symbolic_schedule, EngineConfig, Rigid};
use sbv_rigidity::fields::{griffith_energy, relaxed_energy};
use sbv_rigidity::grid::{infty_rect_bounds_hold, merge_small_components, set_norm, MergeRule, NormKind, StarMeasureConfig};
use sbv_rigidity::harness::{
    frozen_corpus, gen_perturbed_rigid, gen_piecewise_rigid, probe_beam, probe_constant, probe_strip_sweep, run_field,
    Ambient, ModelKind,
};
use sbv_rigidity::local::{evaluate, inner, project_infinitesimal_rigid, projection_residual, InfinitesimalRigidMotion};
use sbv_rigidity::partition::decompose;
use sbv_rigidity::{DeformationField, GridSet, Lattice, RigidMotion, Vec2};

const BEAM_REL: f64 = 0.02;
const BEAM_SECS: f64 = 1.0;
const SLOPE: f64 = -2.0;
const SLOPE_TOL: f64 = 0.15;
const SLOPE_SECS: f64 = 5.0;
const STRIP_TOL: f64 = 0.25;
const STRIP_SECS: f64 = 10.0;
const LIOUVILLE_METRIC: f64 = 1e-9;
const LIOUVILLE_SECS: f64 = 60.0;
const PROJECTION_REL: f64 = 1e-10;
const KERNEL_RESIDUAL: f64 = 1e-12;
const Q_DEFECT: f64 = 1e-12;
const SET_SECS: f64 = 30.0;
const SWEEP_TOL: f64 = 0.20;
/// Pinned bound on `‖∇u‖²/ε^{1−η}` over the sweep (measured 0.33 at ε = 1e-3).
const SWEEP_GRAD_BOUND: f64 = 1.0;
/// Pinned regression value of `C` in `E^ρ(ŷ) ≤ E(y) + Cρ` (largest measured: 3.13, bent slit).
const CORPUS_C: f64 = 4.0;
/// Pinned regression value of `C₁` in the part + crack balance (largest measured: 3.93, bent slit).
const CORPUS_C1: f64 = 5.0;
const PERF_SECS: f64 = 10.0;

#[derive(Default)]
struct Ledger {
    lines: Vec<(bool, String)>,
}

impl Ledger {
    fn record(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        let line = format!("{} [{id:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{line}");
        self.lines.push((pass, line));
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(n: usize) -> Lattice {
    Lattice::with_cell_side(1.0 / n as f64, n, n, Vec2::zero())
}

/// Smooth map with constant offsets on random blocks, a few of them tiny.
fn random_field(r: &mut impl Rng, n: usize, active: Option<Vec<bool>>) -> DeformationField {
    let (a, b, c) = (r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3), r.gen_range(0.5..3.0));
    let mut offset = vec![Vec2::zero(); n * n];
    for _ in 0..r.gen_range(0..6) {
        let (i0, j0) = (r.gen_range(0..n), r.gen_range(0..n));
        let (w, h) = (r.gen_range(1..=n / 2), r.gen_range(1..=n / 2));
        let amp = if r.gen_bool(0.5) { 1e-7 } else { 0.3 };
        let d = Vec2::new(r.gen_range(-amp..amp), r.gen_range(-amp..amp));
        for j in j0..(j0 + h).min(n) {
            for i in i0..(i0 + w).min(n) {
                offset[j * n + i] = offset[j * n + i] + d;
            }
        }
    }
    let active = active.unwrap_or_else(|| (0..n * n).map(|_| r.gen_bool(0.97)).collect());
    DeformationField::from_fn(unit(n), active, |cell, x| {
        Vec2::new(x.x + a * (c * x.y).sin(), x.y + b * (c * x.x).cos()) + offset[cell]
    })
}

fn random_set(r: &mut impl Rng, n: usize, holes: usize) -> GridSet {
    let mut mask = vec![true; n * n];
    for _ in 0..holes {
        let (w, h) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let (i0, j0) = (r.gen_range(0..n - w), r.gen_range(0..n - h));
        for j in j0..j0 + h {
            for i in i0..i0 + w {
                mask[j * n + i] = false;
            }
        }
    }
    GridSet::extract_components(mask, unit(n)).unwrap()
}

fn spread(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn beam(l: &mut Ledger) {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let mut ok = true;
    for delta in [0.2, 0.1, 0.05] {
        let t = Instant::now();
        match probe_beam(delta, 64) {
            Ok(p) => {
                let rel = (p.dist_sq / (delta.powi(3) / 3.0) - 1.0).abs();
                worst = worst.max(rel);
                slowest = slowest.max(secs(t.elapsed()));
            }
            Err(_) => ok = false,
        }
    }
    let pass = ok && worst <= BEAM_REL && slowest < BEAM_SECS;
    l.record(1, "beam bulk energy = δ³/3", pass, format!("max rel err {worst:.2e} (tol {BEAM_REL}), slowest {slowest:.3} s"));
}

fn slope(l: &mut Ledger) {
    let t = Instant::now();
    let r = probe_constant(&[0.2, 0.1, 0.05], 64);
    let el = secs(t.elapsed());
    match r {
        Ok(r) => {
            let pass = (r.fit.slope - SLOPE).abs() <= SLOPE_TOL && el < SLOPE_SECS;
            l.record(
                2,
                "rigidity-constant slope",
                pass,
                format!("slope {:.4} (target {SLOPE} ± {SLOPE_TOL}), R² {:.5}, {el:.2} s", r.fit.slope, r.fit.r_squared),
            );
        }
        Err(e) => l.record(2, "rigidity-constant slope", false, e.to_string()),
    }
}

fn strip(l: &mut Ledger) {
    let t = Instant::now();
    let r = probe_strip_sweep(&[1e-3, 1e-4, 1e-5], 8);
    let el = secs(t.elapsed());
    match r {
        Ok(pts) => {
            let c: Vec<f64> = pts.iter().map(|p| p.c_motion).collect();
            let s = spread(&c);
            let pass = c.iter().all(|&v| v > 0.0) && s <= STRIP_TOL && el < STRIP_SECS;
            l.record(
                3,
                "strip residual ≥ c·ε^{1/3}",
                pass,
                format!("c = {:.4e}, {:.4e}, {:.4e}; spread {s:.3} (tol {STRIP_TOL}), {el:.2} s", c[0], c[1], c[2]),
            );
        }
        Err(e) => l.record(3, "strip residual ≥ c·ε^{1/3}", false, e.to_string()),
    }
}

/// Labels agree on `Ω_ρ` up to a bijection.
fn same_partition(truth: &[u32], got: &[u32], omega: &[bool]) -> bool {
    use std::collections::HashMap;
    let mut fwd: HashMap<u32, u32> = HashMap::new();
    let mut back: HashMap<u32, u32> = HashMap::new();
    for c in (0..truth.len()).filter(|&c| omega[c]) {
        if *fwd.entry(truth[c]).or_insert(got[c]) != got[c] || *back.entry(got[c]).or_insert(truth[c]) != truth[c] {
            return false;
        }
    }
    true
}

fn liouville(l: &mut Ledger) {
    let t = Instant::now();
    let cfg = EngineConfig::default();
    let mut exact = 0;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for seed in 0..20u64 {
        let pieces = 1 + seed as usize % 5;
        let Ok(pw) = gen_piecewise_rigid(1000 + seed, pieces, Ambient::UNIT, 1.0 / 128.0) else {
            bad.push(seed);
            continue;
        };
        let Ok(d) = decompose(&Rigid, &pw.field, &cfg) else {
            bad.push(seed);
            continue;
        };
        let r = &d.report;
        let m = [r.u_l2_sq, r.sym_strain_sq, r.grad_u_sq, r.h1_ju.interior, r.h1_ju.with_boundary];
        let mx = m.iter().copied().fold(0.0, f64::max);
        worst = worst.max(mx);
        let labels = &d.partition.labels;
        if same_partition(&pw.labels, &labels.labels, &labels.omega_rho) && labels.pieces == pieces {
            exact += 1;
        } else {
            bad.push(seed);
        }
    }
    let el = secs(t.elapsed());
    let pass = exact == 20 && worst <= LIOUVILLE_METRIC && el < LIOUVILLE_SECS;
    l.record(
        4,
        "piecewise rigid recovery",
        pass,
        format!("{exact}/20 exact partitions, max metric {worst:.1e} (tol {LIOUVILLE_METRIC:e}), {el:.2} s, misses {bad:?}"),
    );
}

fn projection(l: &mut Ledger) {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    let mut worst_kernel: f64 = 0.0;
    for _ in 0..50 {
        let n = [8, 16, 32][r.gen_range(0..3)];
        let u = random_field(&mut r, n, None);
        let v = random_field(&mut r, n, Some(u.active.clone()));
        let mut region: Vec<bool> = (0..n * n).map(|_| r.gen_bool(0.5)).collect();
        region[r.gen_range(0..n * n)] = true;

        let p = project_infinitesimal_rigid(&u, &region);
        let pu = evaluate(&u, &p);
        let norm = inner(&u, &u, &region);
        let rel = |a: f64, b: f64, s: f64| (a - b).abs() / s.max(1.0);
        let pp = project_infinitesimal_rigid(&pu, &region);
        let idem = rel(pp.a, p.a, p.a.abs()).max(rel(pp.c.x, p.c.x, p.c.norm())).max(rel(pp.c.y, p.c.y, p.c.norm()));

        let (al, be) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let corners = u.corners.iter().zip(&v.corners).map(|(a, b)| std::array::from_fn(|s| a[s].scale(al) + b[s].scale(be))).collect();
        let w = DeformationField::new(u.lattice, corners, u.active.clone());
        let pv = project_infinitesimal_rigid(&v, &region);
        let pw = project_infinitesimal_rigid(&w, &region);
        let sc = p.a.abs() + pv.a.abs() + p.c.norm() + pv.c.norm();
        let lin = rel(pw.a, al * p.a + be * pv.a, sc)
            .max(rel(pw.c.x, al * p.c.x + be * pv.c.x, sc))
            .max(rel(pw.c.y, al * p.c.y + be * pv.c.y, sc));

        let pyth = (norm - inner(&pu, &pu, &region) - projection_residual(&u, &region, &p)).abs() / norm;
        worst = worst.max(idem).max(lin).max(pyth);

        let k0 = InfinitesimalRigidMotion { a: r.gen_range(-2.0..2.0), c: Vec2::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)) };
        let k = evaluate(&u, &k0);
        let pk = project_infinitesimal_rigid(&k, &region);
        worst_kernel = worst_kernel.max(projection_residual(&k, &region, &pk));
    }
    let pass = worst <= PROJECTION_REL && worst_kernel <= KERNEL_RESIDUAL;
    l.record(
        5,
        "Korn-Poincaré projection identities",
        pass,
        format!("max rel defect {worst:.1e} (tol {PROJECTION_REL:e}), max kernel residual {worst_kernel:.1e} (tol {KERNEL_RESIDUAL:e})"),
    );
}

fn schedule(l: &mut Ledger) {
    let mut r = rng(6);
    let mut feasible = 0;
    let mut tries = 0;
    let mut worst = 0.0f64;
    while feasible < 10 && tries < 2000 {
        tries += 1;
        let rho = r.gen_range(0.05..0.3);
        let cfg = EngineConfig {
            rho,
            t: r.gen_range(0.02..rho),
            eta: r.gen_range(0.1..0.4),
            z: r.gen_range(2.0..6.0),
            schedule_ln_eps: Some(-10f64.powf(r.gen_range(6.0..8.0))),
            ..EngineConfig::default()
        };
        if let Ok(s) = symbolic_schedule(&cfg, r.gen_range(0.5..5.0)) {
            feasible += 1;
            worst = worst.max(s.q_identity_defect);
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"t": 0.9, "rho": 0.95}"#).unwrap();
    let code = Command::new(env!("CARGO_BIN_EXE_rigidity"))
        .args(["schedule", "-c"])
        .arg(&bad)
        .output()
        .map(|o| o.status.code())
        .ok()
        .flatten();
    let pass = feasible == 10 && worst <= Q_DEFECT && code == Some(2);
    l.record(
        6,
        "schedule algebra",
        pass,
        format!("{feasible}/10 feasible in {tries} draws, max q defect {worst:.1e} (tol {Q_DEFECT:e}), infeasible exit {code:?}"),
    );
}

fn set_calculus(l: &mut Ledger) {
    let t = Instant::now();
    let rects = (1..=32u64).all(|a| (1..=32u64).all(|b| infty_rect_bounds_hold(a, b)));
    let mut r = rng(7);
    let cfg = StarMeasureConfig::default();
    let mut merge_ok = true;
    let mut order_ok = true;
    for _ in 0..100 {
        let holes = r.gen_range(2..14);
        let mut w = random_set(&mut r, 32, holes);
        let before = set_norm(&w, NormKind::Star, cfg);
        for rule in [MergeRule::BothSmall, MergeRule::AnySmall] {
            let k = r.gen_range(1..10) as f64 / 32.0;
            merge_ok &= set_norm(&merge_small_components(&w, k, rule), NormKind::Star, cfg) <= before;
        }
        let base = set_norm(&w, NormKind::Hausdorff, cfg);
        let (mut a, mut b): (Vec<usize>, Vec<usize>) = (0..w.components.len()).partition(|&k| !w.components[k].touches_boundary);
        for _ in 0..10 {
            a.shuffle(&mut r);
            b.shuffle(&mut r);
            order_ok &= w.set_ordering(a.iter().chain(&b).copied().collect()).is_ok();
            order_ok &= set_norm(&w, NormKind::Hausdorff, cfg) == base;
        }
    }
    let mut carve_ok = true;
    let mut carved = 0;
    for _ in 0..40 {
        let n = 64;
        let f = random_field(&mut r, n, None);
        let eps = 10f64.powf(r.gen_range(-5.0..-1.0));
        let out = select_carving(&Rigid, &f, &vec![true; n * n], r.gen_range(1..=4), eps, 4.0, 0.1);
        carve_ok &= out.boundary_star <= 8.0 * out.gamma / eps;
        carved += out.squares.len();
    }
    let el = secs(t.elapsed());
    let pass = rects && merge_ok && order_ok && carve_ok && carved > 0 && el < SET_SECS;
    l.record(
        7,
        "set calculus",
        pass,
        format!(
            "rect bounds {rects}, merge monotone {merge_ok}, H order-free {order_ok}, carve budget {carve_ok} ({carved} squares), {el:.2} s"
        ),
    );
}

fn relaxed(l: &mut Ledger) {
    let mut r = rng(8);
    let mut ok = 0;
    let mut strict = 0;
    for _ in 0..100 {
        let n = [16, 32, 64][r.gen_range(0..3)];
        let f = random_field(&mut r, n, None);
        let eps = 10f64.powf(r.gen_range(-6.0..-1.0));
        let rho = r.gen_range(0.01..0.5);
        let (Ok(e), Ok(er)) = (griffith_energy(&f, eps), relaxed_energy(&f, eps, rho, None)) else { continue };
        if er.relaxed_total() <= e.total() {
            ok += 1;
        }
        if er.relaxed_total() < e.total() {
            strict += 1;
        }
    }
    l.record(8, "relaxed energy below Griffith", ok == 100, format!("{ok}/100 exact, {strict} strict"));
}

fn sweep(l: &mut Ledger) {
    let motion = RigidMotion::from_angle(0.3, Vec2::new(0.2, -0.1));
    let mut u = Vec::new();
    let mut sym = Vec::new();
    let mut grad = Vec::new();
    let mut ok = true;
    for eps in [1e-3, 1e-4, 1e-5] {
        let y = gen_perturbed_rigid(eps, 128, motion);
        let cfg = EngineConfig { eps, ..EngineConfig::default() };
        match run_field(&y, ModelKind::Rigid, &cfg, None) {
            Ok(o) => {
                u.push(o.report.ratios.u_over_eps);
                sym.push(o.report.ratios.sym_over_eps);
                grad.push(o.report.ratios.grad_over_eps_1_eta);
                ok &= o.report.pieces.len() == 1;
            }
            Err(_) => ok = false,
        }
    }
    let pass = ok
        && spread(&u) <= SWEEP_TOL
        && spread(&sym) <= SWEEP_TOL
        && grad.iter().all(|&g| g.is_finite() && g <= SWEEP_GRAD_BOUND);
    l.record(
        9,
        "ε-sweep scaling",
        pass,
        format!(
            "u/ε {:?} spread {:.3}; sym/ε {:?} spread {:.3} (tol {SWEEP_TOL}); grad/ε^(1-η) {:?} (bound {SWEEP_GRAD_BOUND})",
            u.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            spread(&u),
            sym.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            spread(&sym),
            grad.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
        ),
    );
}

fn corpus(l: &mut Ledger) {
    let Ok(entries) = frozen_corpus() else {
        l.record(10, "corpus energy accounting", false, "corpus failed to build".into());
        return;
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for e in &entries {
        let a = run_field(&e.field, ModelKind::Rigid, &e.config, None);
        let b = run_field(&e.field, ModelKind::Rigid, &e.config, None);
        let (Ok(a), Ok(b)) = (a, b) else {
            ok = false;
            parts.push(format!("{}: error", e.name));
            continue;
        };
        let r = &a.report;
        let identical = r.to_json().ok() == b.report.to_json().ok();
        let bound = r.e_eps_rho_yhat.relaxed_total() <= r.e_eps_y.total() + r.energy_constant * r.rho * (1.0 + 1e-12);
        let balance = r.half_perimeter + r.seam_relaxed <= r.e_eps_y.surface + r.part_crack_constant * r.rho * (1.0 + 1e-12);
        ok &= identical && bound && balance && r.energy_constant <= CORPUS_C && r.part_crack_constant <= CORPUS_C1 && a.exit == 0;
        parts.push(format!(
            "{} C={:.3} C1={:.3}{}",
            e.name,
            r.energy_constant,
            r.part_crack_constant,
            if identical { "" } else { " NONDETERMINISTIC" }
        ));
    }
    l.record(
        10,
        "corpus energy accounting",
        ok,
        format!("{} (pins C ≤ {CORPUS_C}, C1 ≤ {CORPUS_C1})", parts.join("; ")),
    );
}

fn performance(l: &mut Ledger) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pw = gen_piecewise_rigid(3, 3, Ambient::UNIT, 1.0 / 256.0).unwrap();
    let t = Instant::now();
    let d = pool.install(|| decompose(&Rigid, &pw.field, &EngineConfig::default()));
    let el = secs(t.elapsed());
    let pieces = d.as_ref().map(|d| d.partition.labels.pieces).unwrap_or(0);
    l.record(11, "256² decompose, one thread", d.is_ok() && pieces == 3 && el < PERF_SECS, format!("{el:.2} s (limit {PERF_SECS}), {pieces} pieces"));
}

#[test]
fn acceptance() {
    let mut l = Ledger::default();
    beam(&mut l);
    slope(&mut l);
    strip(&mut l);
    liouville(&mut l);
    projection(&mut l);
    schedule(&mut l);
    set_calculus(&mut l);
    relaxed(&mut l);
    sweep(&mut l);
    corpus(&mut l);
    performance(&mut l);
    let failed: Vec<&String> = l.lines.iter().filter(|(p, _)| !p).map(|(_, s)| s).collect();
    assert!(failed.is_empty(), "{} criteria failed:\n{}", failed.len(), failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n"));
}
