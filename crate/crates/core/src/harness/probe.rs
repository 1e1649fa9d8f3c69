//! Constant-scaling probes on the closed-form examples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Result};
use crate::fields::cell_energy;
use crate::harness::generators::{gen_beam, gen_twopiece, Ambient};
use crate::local::{best_fit_rigid_motion, best_fit_rotation, motion_residual, rotation_residual};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: [f64; 2],
    pub r_squared: f64,
    pub points: usize,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(invalid("a log-log fit needs at least three points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(invalid("log-log data must be positive and finite"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("log-log fit needs distinct parameters"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let dof = n - 2.0;
    let half = if dof > 0.0 && sse > 0.0 {
        let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| invalid(e.to_string()))?.inverse_cdf(0.975);
        t * (sse / dof / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LogLogFit { slope, intercept, slope_ci: [slope - half, slope + half], r_squared, points: xs.len() })
}

/// One beam thickness of the rigidity-constant probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub delta: f64,
    pub h: f64,
    /// `‖dist(∇y, SO(2))‖²`.
    pub dist_sq: f64,
    /// `min_R ‖∇y − R‖²`.
    pub dev_sq: f64,
    /// `dev_sq / dist_sq`.
    pub ratio: f64,
    /// `min_{R,c} ‖y − (R x + c)‖²`.
    pub motion_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub parameter: String,
    pub points: Vec<ProbePoint>,
    /// Slope of `ratio` against `δ`.
    pub fit: LogLogFit,
    /// Fit quality below `R² = 0.95`.
    pub flagged: bool,
    pub ratios_increasing: bool,
}

/// Beam probe at `h = δ / cells_per_delta` for every `δ`.
pub fn probe_beam(delta: f64, cells_per_delta: usize) -> Result<ProbePoint> {
    let h = delta / cells_per_delta as f64;
    let f = gen_beam(delta, h)?;
    let all = vec![true; f.cell_count()];
    let dist_sq = cell_energy(&f, None);
    let r = best_fit_rotation(&f, &all)?;
    let dev_sq = rotation_residual(&f, &all, r.r);
    let m = best_fit_rigid_motion(&f, &all)?;
    Ok(ProbePoint { delta, h, dist_sq, dev_sq, ratio: dev_sq / dist_sq, motion_sq: motion_residual(&f, &all, &m) })
}

pub fn probe_constant(deltas: &[f64], cells_per_delta: usize) -> Result<ProbeResult> {
    if deltas.len() < 3 {
        return Err(invalid("the constant probe needs at least three thicknesses"));
    }
    let points: Vec<ProbePoint> =
        deltas.par_iter().map(|&d| probe_beam(d, cells_per_delta)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.delta).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let fit = loglog_fit(&xs, &ys)?;
    let mut by_delta: Vec<&ProbePoint> = points.iter().collect();
    by_delta.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let ratios_increasing = by_delta.windows(2).all(|w| w[1].ratio > w[0].ratio);
    Ok(ProbeResult { parameter: "delta".into(), flagged: fit.r_squared < 0.95, points, fit, ratios_increasing })
}

/// One `ε` of the strip example sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    pub eps: f64,
    pub h: f64,
    pub dist_sq: f64,
    /// `min_{R,c} ‖y − (R x + c)‖²` on the whole window.
    pub motion_sq: f64,
    /// `min_R ‖∇y − R‖²` on the whole window.
    pub dev_sq: f64,
    /// `motion_sq / ε^{1/3}`.
    pub c_motion: f64,
    /// `dev_sq / ε^{1/3}`.
    pub c_dev: f64,
}

/// The strip example at `h = ε^{1/3}/cells_per_strip` in its default window.
pub fn probe_strip(eps: f64, cells_per_strip: usize) -> Result<StripPoint> {
    let a = eps.cbrt();
    let h = a / cells_per_strip as f64;
    let f = gen_twopiece(eps, h, Ambient::around_strip(a))?;
    let all = vec![true; f.cell_count()];
    let m = best_fit_rigid_motion(&f, &all)?;
    let r = best_fit_rotation(&f, &all)?;
    let motion_sq = motion_residual(&f, &all, &m);
    let dev_sq = rotation_residual(&f, &all, r.r);
    Ok(StripPoint { eps, h, dist_sq: cell_energy(&f, None), motion_sq, dev_sq, c_motion: motion_sq / a, c_dev: dev_sq / a })
}

pub fn probe_strip_sweep(eps: &[f64], cells_per_strip: usize) -> Result<Vec<StripPoint>> {
    eps.par_iter().map(|&e| probe_strip(e, cells_per_strip)).collect()
}

/// One CSV row per point.
pub fn write_rows<T: Serialize>(path: &std::path::Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-2.0)).collect();
        let f = loglog_fit(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!(loglog_fit(&xs[..2], &ys[..2]).is_err());
    }

    #[test]
    fn beam_energy_is_a_third_delta_cubed() {
        let p = probe_beam(0.1, 64).unwrap();
        assert!((p.dist_sq - 1e-3 / 3.0).abs() / (1e-3 / 3.0) < 0.02, "{p:?}");
    }
}
