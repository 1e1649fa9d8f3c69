use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Engine parameters. Missing JSON fields take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Energy scale `ε` of the run.
    pub eps: f64,
    pub rho: f64,
    /// `q` in `ϱ = ρ^q`.
    pub q_exponent: u32,
    /// Ratio entering the `C_m = m^{-z}` surrogate; defaults to `ρ`.
    pub m: Option<f64>,
    pub t: f64,
    pub h_star: f64,
    pub eta: f64,
    /// Exponent of the `C_m = m^{-z}` surrogate.
    pub z: f64,
    /// Carving constant `c_*`.
    pub threshold_c: f64,
    /// `ĉ` in `P = ĉ²(1 + B/ρ)` and `ε₀ = ĉ²ε/ρ`.
    pub c_hat: f64,
    /// `C_*` in the budget sequence `B_j`.
    pub c_star: f64,
    /// `ln κ` for `s₀ = κε`; chosen automatically when absent.
    pub ln_kappa: Option<f64>,
    pub z_bar: Option<u32>,
    /// `ln ε` at which the symbolic schedule is evaluated; `None` uses `ln eps`.
    pub schedule_ln_eps: Option<f64>,
    /// `‖Ω̃_y‖_*` entering `B`; measured from the input when absent.
    pub norm0: Option<f64>,
    /// Scale growth `s_{j+1}/s_j` of the run.
    pub desk_growth: f64,
    /// `λ/k` of the run.
    pub desk_t: f64,
    /// Minimal fraction of the `2λ × 2λ` square a fitting patch must cover.
    pub coverage: f64,
    /// `C₁` in the per-step norm budget `(1 + C₁t)·β + 8γ/ε`.
    pub budget_c1: f64,
    pub max_steps: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            rho: 0.1,
            q_exponent: 4,
            m: None,
            t: 0.1,
            h_star: 0.1,
            eta: 0.2,
            z: 4.0,
            threshold_c: 4.0,
            c_hat: 2.0,
            c_star: 1.0,
            ln_kappa: None,
            z_bar: None,
            schedule_ln_eps: Some(-1e7),
            norm0: None,
            desk_growth: 2.0,
            desk_t: 0.5,
            coverage: 0.25,
            budget_c1: 64.0,
            max_steps: None,
        }
    }
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::Infeasible(msg.into())
}

impl EngineConfig {
    pub fn m(&self) -> f64 {
        self.m.unwrap_or(self.rho)
    }

    /// `ln ε` used by the symbolic schedule.
    pub fn schedule_ln_eps(&self) -> f64 {
        self.schedule_ln_eps.unwrap_or_else(|| self.eps.ln())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.eps,
            self.rho,
            self.t,
            self.h_star,
            self.eta,
            self.z,
            self.threshold_c,
            self.c_hat,
            self.c_star,
            self.desk_growth,
            self.desk_t,
            self.coverage,
            self.budget_c1,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(infeasible("config holds a non-finite value"));
        }
        if !(self.eps > 0.0) {
            return Err(infeasible("eps must be positive"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(infeasible("rho must lie in (0, 1)"));
        }
        if !(self.t > 0.0 && self.t <= self.rho) {
            return Err(infeasible("t must satisfy 0 < t <= rho"));
        }
        if !(self.h_star > 0.0 && self.h_star < 1.0) {
            return Err(infeasible("h_star must lie in (0, 1)"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(infeasible("eta must lie in (0, 1)"));
        }
        if self.q_exponent < 2 {
            return Err(infeasible("q_exponent must be at least 2"));
        }
        if let Some(m) = self.m {
            if !(m > 0.0 && m < 1.0) {
                return Err(infeasible("m must lie in (0, 1)"));
            }
        }
        if self.z < 0.0 {
            return Err(infeasible("z must be non-negative"));
        }
        if self.threshold_c < 1.0 {
            return Err(infeasible("threshold_c must be at least 1"));
        }
        if self.c_hat < 1.0 || self.c_star < 1.0 {
            return Err(infeasible("c_hat and c_star must be at least 1"));
        }
        if !(self.desk_growth >= 2.0 && self.desk_growth.fract() == 0.0) {
            return Err(infeasible("desk_growth must be an integer >= 2"));
        }
        if !(self.desk_t > 0.0 && self.desk_t <= 1.0) {
            return Err(infeasible("desk_t must lie in (0, 1]"));
        }
        if !(self.coverage >= 0.0 && self.coverage <= 1.0) {
            return Err(infeasible("coverage must lie in [0, 1]"));
        }
        if let Some(l) = self.schedule_ln_eps {
            if !(l < 0.0) || !l.is_finite() {
                return Err(infeasible("schedule_ln_eps must be negative"));
            }
        }
        Ok(())
    }
}
