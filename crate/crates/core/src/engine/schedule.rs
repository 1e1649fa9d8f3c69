//! Scale schedules.
//!
//! The symbolic schedule is evaluated in log space: at admissible `ε` the
//! quantities `T_j^{-1}`, `κ` and `ε_j` overflow any float. The desk schedule
//! is the resolvable ladder the engine actually runs on a grid.

use serde::{Deserialize, Serialize};

use crate::engine::config::EngineConfig;
use crate::error::{Error, Result};

/// `r` in `d_j = (s_j/ε_j)^r`.
pub const R_EXP: f64 = 1.0 / 18.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub j: usize,
    pub ln_s: f64,
    pub ln_eps: f64,
    pub ln_d: f64,
    /// `d_j` hit the `ε^{-ω}` cap.
    pub d_capped: bool,
    pub ln_t: f64,
    pub ln_big_t: f64,
    pub ln_l: f64,
    pub ln_lambda: f64,
    pub ln_k: f64,
    /// `ln(λ_j/k_j)`.
    pub ln_nu: f64,
    pub ln_q: f64,
    pub ln_theta: f64,
    /// Right-hand side of the `ϑ_j` check.
    pub ln_theta_bound: f64,
    /// `B_j`.
    pub budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub ln_eps: f64,
    pub r: f64,
    pub omega: f64,
    pub ln_big_t: f64,
    /// `B = lim B_j`.
    pub budget_limit: f64,
    pub ln_p: f64,
    pub ln_kappa: f64,
    pub kappa_auto: bool,
    pub z_bar: u32,
    pub j_star: usize,
    /// Last index with `s_j/ε_j ≤ ε^{-η/2}`.
    pub j_hat: Option<usize>,
    /// First index with `s_j ≥ ε^{4ω}`, if reached.
    pub j_stop: Option<usize>,
    /// Whether `s_{j_stop} ≤ ε^{3ω}`.
    pub stop_in_band: bool,
    /// Largest relative defect of `q_{j+1} = T q_j^{1+r}` over `j + 1 ≤ Ĵ`.
    pub q_identity_defect: f64,
    /// Largest relative defect of the closed form of `q_j` over `j ≤ Ĵ`.
    pub q_closed_defect: f64,
    pub steps: Vec<ScheduleStep>,
}

/// `J* = ⌈log_{1+r}(ω ln ε / ln T) + 1/ω⌉`, clamped at 0.
pub fn j_star(ln_eps: f64, ln_big_t: f64, r: f64, omega: f64) -> usize {
    let v = ((omega * ln_eps / ln_big_t).ln() / (1.0 + r).ln() + 1.0 / omega).ceil();
    if v.is_finite() && v > 0.0 {
        v as usize
    } else {
        0
    }
}

/// Smallest integer `z̄ ≥ 1` with `(z̄/r)(1+r)^j ≥ 9(j+1)²` for `j ≤ J*`.
pub fn z_bar(r: f64, j_star: usize) -> u32 {
    let need = (0..=j_star)
        .map(|j| 9.0 * ((j + 1) as f64).powi(2) * r / (1.0 + r).powi(j as i32))
        .fold(1.0, f64::max);
    let mut z = need.ceil() as u32;
    // Guard the ceiling against rounding in either direction.
    while z > 1 && (0..=j_star).all(|j| ((z - 1) as f64 / r) * (1.0 + r).powi(j as i32) >= 9.0 * ((j + 1) as f64).powi(2)) {
        z -= 1;
    }
    while !(0..=j_star).all(|j| (z as f64 / r) * (1.0 + r).powi(j as i32) >= 9.0 * ((j + 1) as f64).powi(2)) {
        z += 1;
    }
    z
}

/// `B_j = (n₀ + C_*ρ)·Σ_{i<j} t^i·Π_{i<j}(1 + C_* t^{i+1})`.
pub fn budget_sequence(norm0: f64, rho: f64, t: f64, c_star: f64, j: usize) -> f64 {
    let sum: f64 = (0..j).map(|i| t.powi(i as i32)).sum();
    let prod: f64 = (0..j).map(|i| 1.0 + c_star * t.powi(i as i32 + 1)).product();
    (norm0 + c_star * rho) * sum * prod
}

/// Limit of [`budget_sequence`]; the product converges geometrically.
pub fn budget_limit(norm0: f64, rho: f64, t: f64, c_star: f64) -> f64 {
    let sum = 1.0 / (1.0 - t);
    let mut prod = 1.0;
    let mut i = 1;
    loop {
        let f = 1.0 + c_star * t.powi(i);
        if f == 1.0 {
            break;
        }
        prod *= f;
        i += 1;
    }
    (norm0 + c_star * rho) * sum * prod
}

fn infeasible(msg: String) -> Error {
    Error::Infeasible(msg)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Evaluate the symbolic schedule for `cfg` with `‖Ω̃_y‖_* = norm0`.
pub fn symbolic_schedule(cfg: &EngineConfig, norm0: f64) -> Result<ScaleSchedule> {
    cfg.validate()?;
    let ln_eps = cfg.schedule_ln_eps();
    let r = R_EXP;
    let omega = cfg.eta / 36.0;
    let ln_t = cfg.t.ln();
    let ln_big_t = (2.0 * cfg.z + 18.0) * ln_t;
    let b = budget_limit(norm0, cfg.rho, cfg.t, cfg.c_star);
    let ln_p = 2.0 * cfg.c_hat.ln() + (1.0 + b / cfg.rho).ln();
    let ln_c_hat = cfg.c_hat.ln();

    if -ln_big_t < 4.0 * ln_c_hat + 2.0 * ln_p {
        return Err(infeasible(format!(
            "T^-1 >= c_hat^4 P^2 fails: -ln T = {:.6e} < {:.6e}",
            -ln_big_t,
            4.0 * ln_c_hat + 2.0 * ln_p
        )));
    }

    let js = j_star(ln_eps, ln_big_t, r, omega);
    let zb = cfg.z_bar.unwrap_or_else(|| z_bar(r, js));
    let (ln_kappa, kappa_auto) = match cfg.ln_kappa {
        Some(k) => (k, false),
        None => (
            (-(zb as f64 + 1.0 / r) * ln_big_t - ln_big_t + ln_p) / r - cfg.rho.ln() + 2.0 * ln_c_hat + 1.0,
            true,
        ),
    };

    let ln_eps0 = 2.0 * ln_c_hat + ln_eps - cfg.rho.ln();
    let cap = -omega * ln_eps;
    let mut steps = Vec::with_capacity(js + 1);
    let mut ln_s = ln_kappa + ln_eps;
    let mut ln_e = ln_eps0;
    for j in 0..=js {
        let ln_tj = (j as f64 + 1.0) * ln_t;
        let ln_tt = (j as f64 + 1.0) * ln_big_t;
        let raw = r * (ln_s - ln_e);
        let ln_d = raw.min(cap);
        let ln_l = ln_d - 2.0 * ln_tj;
        let ln_lambda = ln_s + ln_d - ln_tj;
        let ln_k = ln_s + ln_l;
        let ln_q = ln_d + ln_tt - ln_p;
        let ln_e_next = ln_p - ln_tt + ln_e;
        let ln_theta = -ln_s + ln_e + 9.0 * ln_l - 2.0 * cfg.z * ln_tj;
        let ln_theta_bound = ln_eps0 - 2.0 * ln_c_hat - ln_e_next + ln_tt;
        steps.push(ScheduleStep {
            j,
            ln_s,
            ln_eps: ln_e,
            ln_d,
            d_capped: raw > cap,
            ln_t: ln_tj,
            ln_big_t: ln_tt,
            ln_l,
            ln_lambda,
            ln_k,
            ln_nu: ln_lambda - ln_k,
            ln_q,
            ln_theta,
            ln_theta_bound,
            budget: budget_sequence(norm0, cfg.rho, cfg.t, cfg.c_star, j),
        });
        ln_s += ln_d;
        ln_e = ln_e_next;
    }

    if steps[0].d_capped {
        return Err(infeasible(format!(
            "epsilon too large for this rho/t: d_0 = (s_0/eps_0)^r exceeds eps^-omega ({:.6e} > {:.6e})",
            r * (steps[0].ln_s - steps[0].ln_eps),
            cap
        )));
    }
    if !kappa_auto && steps[0].ln_q + ln_big_t / r < -(zb as f64) * ln_big_t {
        return Err(infeasible(format!(
            "q_0 T^(1/r) >= T^-z_bar fails: {:.6e} < {:.6e}",
            steps[0].ln_q + ln_big_t / r,
            -(zb as f64) * ln_big_t
        )));
    }
    for st in &steps {
        if st.ln_theta > st.ln_theta_bound + 1e-12 * st.ln_theta_bound.abs().max(1.0) {
            return Err(infeasible(format!(
                "theta_{} check fails: ln theta = {:.6e} > {:.6e}",
                st.j, st.ln_theta, st.ln_theta_bound
            )));
        }
    }

    let bound = -cfg.eta / 2.0 * ln_eps;
    let j_hat = steps.iter().take_while(|s| s.ln_s - s.ln_eps <= bound).last().map(|s| s.j);
    let mut q_identity_defect = 0.0f64;
    let mut q_closed_defect = 0.0f64;
    if let Some(jh) = j_hat {
        let q0 = steps[0].ln_q;
        for j in 0..=jh {
            let closed = -ln_big_t / r + (q0 + ln_big_t / r) * (1.0 + r).powi(j as i32);
            q_closed_defect = q_closed_defect.max(rel(steps[j].ln_q, closed));
            if j + 1 <= jh {
                let pred = ln_big_t + (1.0 + r) * steps[j].ln_q;
                q_identity_defect = q_identity_defect.max(rel(steps[j + 1].ln_q, pred));
            }
        }
    }
    let j_stop = steps.iter().find(|s| s.ln_s >= 4.0 * omega * ln_eps).map(|s| s.j);
    let stop_in_band = j_stop.map_or(false, |j| steps[j].ln_s <= 3.0 * omega * ln_eps);

    Ok(ScaleSchedule {
        ln_eps,
        r,
        omega,
        ln_big_t,
        budget_limit: b,
        ln_p,
        ln_kappa,
        kappa_auto,
        z_bar: zb,
        j_star: js,
        j_hat,
        j_stop,
        stop_in_band,
        q_identity_defect,
        q_closed_defect,
        steps,
    })
}

/// One resolvable scale of a run, in lattice cells and physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeskStep {
    pub j: usize,
    pub s: f64,
    pub eps: f64,
    /// Half side of the carving squares, in cells.
    pub k_cells: usize,
    /// Spacing of the local-motion points, in cells.
    pub lambda_cells: usize,
    pub k: f64,
    pub lambda: f64,
    /// `λ/k`.
    pub t: f64,
}

/// `s₀ = h/2` growing by `desk_growth`, `k = s·growth/t²`, `λ = s·growth/t`,
/// `ε₀ = ĉ²ε/ρ` growing by `desk_growth`; stops once a carving square
/// no longer fits in `ρ`.
pub fn desk_schedule(cfg: &EngineConfig, h: f64) -> Vec<DeskStep> {
    let g = cfg.desk_growth;
    let mut out = Vec::new();
    let mut s = h / 2.0;
    let mut eps = cfg.c_hat * cfg.c_hat * cfg.eps / cfg.rho;
    for j in 0.. {
        if cfg.max_steps.map_or(false, |m| j >= m) {
            break;
        }
        let k_cells = (s * g / (cfg.desk_t * cfg.desk_t) / h).round().max(1.0) as usize;
        let lambda_cells = (s * g / cfg.desk_t / h).round().max(1.0) as usize;
        let k = k_cells as f64 * h;
        if 2.0 * k > cfg.rho * (1.0 + 1e-12) {
            break;
        }
        out.push(DeskStep {
            j,
            s,
            eps,
            k_cells,
            lambda_cells,
            k,
            lambda: lambda_cells as f64 * h,
            t: lambda_cells as f64 / k_cells as f64,
        });
        s *= g;
        eps *= g;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_proxy_schedule_is_feasible() {
        let s = symbolic_schedule(&EngineConfig::default(), 0.0).unwrap();
        assert!(s.kappa_auto);
        assert!(s.j_hat.is_some());
        assert!(s.q_identity_defect <= 1e-12, "{}", s.q_identity_defect);
        assert_eq!(s.steps.len(), s.j_star + 1);
    }

    #[test]
    fn desk_eps_is_infeasible() {
        let cfg = EngineConfig { schedule_ln_eps: None, ..EngineConfig::default() };
        assert!(matches!(symbolic_schedule(&cfg, 0.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn z_bar_is_minimal() {
        for js in [0, 3, 10, 40] {
            let z = z_bar(R_EXP, js);
            let ok = |z: u32| (0..=js).all(|j| (z as f64 / R_EXP) * (1.0 + R_EXP).powi(j as i32) >= 9.0 * ((j + 1) as f64).powi(2));
            assert!(ok(z) && (z == 1 || !ok(z - 1)));
        }
    }

    #[test]
    fn budget_sequence_increases_to_limit() {
        let b: Vec<f64> = (0..60).map(|j| budget_sequence(0.3, 0.1, 0.1, 1.0, j)).collect();
        assert!(b.windows(2).all(|w| w[0] <= w[1]));
        assert!((b[59] - budget_limit(0.3, 0.1, 0.1, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn desk_ladder_doubles() {
        let cfg = EngineConfig::default();
        let d = desk_schedule(&cfg, 1.0 / 256.0);
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].k_cells, d[0].lambda_cells), (4, 2));
        assert_eq!((d[1].k_cells, d[1].lambda_cells), (8, 4));
        assert!((d[1].eps / d[0].eps - 2.0).abs() < 1e-15);
        assert_eq!(desk_schedule(&cfg, 1.0 / 128.0).len(), 1);
    }
}
