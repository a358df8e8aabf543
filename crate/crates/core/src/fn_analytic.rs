//! Closed-form Fowler-Nordheim model: I = A F² exp(−B/F), the two-pulse baseline and
//! peak currents built from it, and a least-squares fit of the laser field to measured
//! peak-to-baseline ratios.
//!
//! Fields and B are in atomic units like the rest of the crate; `*_gvm` helpers convert.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FNParams {
    /// Prefactor A (current per field²).
    pub a: f64,
    /// Exponent constant B (field).
    pub b: f64,
    /// Multiply B by the Nordheim factor v(y) with y = √F/Φ.
    pub schottky_correction: bool,
    /// Φ (Hartree); only used by the correction.
    pub work_function: f64,
}

/// B = (4/3)√(2m) Φ^{3/2}/(qħ), the standard FN exponent constant, in atomic units.
pub fn exponent_constant(work_function: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::SQRT_2 * work_function.powf(1.5)
}

/// Forbes approximation v(y) = 1 − y² + (y²/3) ln y, clamped to 0 once the barrier is
/// pulled below the Fermi level (y ≥ 1).
pub fn nordheim_factor(y: f64) -> f64 {
    if y <= 0.0 {
        1.0
    } else if y >= 1.0 {
        0.0
    } else {
        let y2 = y * y;
        1.0 - y2 + y2 / 3.0 * y.ln()
    }
}

fn nordheim_factor_derivative(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        -2.0 * y + 2.0 * y / 3.0 * y.ln() + y / 3.0
    }
}

impl FNParams {
    pub fn new(a: f64, b: f64, schottky_correction: bool, work_function: f64) -> Result<Self> {
        if !(a > 0.0) {
            return domain(format!("prefactor A must be positive, got {a}"));
        }
        if !(b >= 0.0) {
            return domain(format!("exponent constant B must be non-negative, got {b}"));
        }
        if schottky_correction && !(work_function > 0.0) {
            return domain("the barrier correction needs a positive work function");
        }
        Ok(Self { a, b, schottky_correction, work_function })
    }

    /// B from Φ with the barrier correction on.
    pub fn from_work_function(work_function: f64) -> Result<Self> {
        Self::new(1.0, exponent_constant(work_function), true, work_function)
    }

    /// Field-independent B given in GV/m, correction off.
    pub fn effective_gvm(b_gvm: f64) -> Result<Self> {
        Self::new(1.0, units::gvm(b_gvm), false, units::ev(4.5))
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn b_gvm(&self) -> f64 {
        units::to_gvm(self.b)
    }

    /// B·v(y) at field `f`.
    pub fn effective_b(&self, f: f64) -> f64 {
        if self.schottky_correction {
            self.b * nordheim_factor(f.sqrt() / self.work_function)
        } else {
            self.b
        }
    }

    /// True when the correction clamps the barrier to nothing at field `f`.
    pub fn barrier_suppressed(&self, f: f64) -> bool {
        self.schottky_correction && f.sqrt() >= self.work_function
    }

    /// ln(F² exp(−B_eff/F)), the A-free log current.
    fn log_shape(&self, f: f64) -> f64 {
        2.0 * f.ln() - self.effective_b(f) / f
    }

    /// ∂/∂F and ∂/∂B of [`Self::log_shape`].
    fn log_shape_gradient(&self, f: f64) -> (f64, f64) {
        if self.schottky_correction {
            let y = f.sqrt() / self.work_function;
            let v = nordheim_factor(y);
            let dv = nordheim_factor_derivative(y) * y / (2.0 * f);
            (2.0 / f + self.b * v / (f * f) - self.b * dv / f, -v / f)
        } else {
            (2.0 / f + self.b / (f * f), -1.0 / f)
        }
    }
}

/// I = A F² exp(−B_eff/F).
pub fn fn_current(p: &FNParams, f: f64) -> Result<f64> {
    if !(f > 0.0) {
        return domain(format!("field must be positive, got {f}"));
    }
    Ok(p.a * p.log_shape(f).exp())
}

fn check_pair(f_laser: f64, f_dc: f64) -> Result<()> {
    if !(f_laser >= 0.0) {
        return domain(format!("laser field must be non-negative, got {f_laser}"));
    }
    if !(f_laser + f_dc > 0.0) {
        return domain("total field must be positive");
    }
    Ok(())
}

/// Two non-overlapping pulses: 2A(F_l + F_dc)² exp(−B/(F_l + F_dc)).
pub fn iac_baseline(p: &FNParams, f_laser: f64, f_dc: f64) -> Result<f64> {
    check_pair(f_laser, f_dc)?;
    Ok(2.0 * fn_current(p, f_laser + f_dc)?)
}

/// Two perfectly overlapping pulses: A(2F_l + F_dc)² exp(−B/(2F_l + F_dc)).
pub fn iac_peak(p: &FNParams, f_laser: f64, f_dc: f64) -> Result<f64> {
    check_pair(f_laser, f_dc)?;
    fn_current(p, 2.0 * f_laser + f_dc)
}

/// Peak over baseline. A cancels and is never evaluated, so the result does not depend on it.
pub fn peak_to_baseline(p: &FNParams, f_laser: f64, f_dc: f64) -> Result<f64> {
    Ok(log_ratio(p, f_laser, f_dc)?.exp())
}

fn log_ratio(p: &FNParams, f_laser: f64, f_dc: f64) -> Result<f64> {
    check_pair(f_laser, f_dc)?;
    Ok(p.log_shape(2.0 * f_laser + f_dc) - std::f64::consts::LN_2 - p.log_shape(f_laser + f_dc))
}

/// ∂ ln R/∂F_l and ∂ ln R/∂B.
fn log_ratio_gradient(p: &FNParams, f_laser: f64, f_dc: f64) -> (f64, f64) {
    let (pf, pb) = p.log_shape_gradient(2.0 * f_laser + f_dc);
    let (bf, bb) = p.log_shape_gradient(f_laser + f_dc);
    (2.0 * pf - bf, pb - bb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    /// Stop when every relative parameter step is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub f_laser: f64,
    pub sigma_f_laser: f64,
    pub b: f64,
    /// Zero when B was held fixed.
    pub sigma_b: f64,
    pub fit_b: bool,
    /// ln(model) − ln(data) per point.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub settings: FitSettings,
    /// Data points whose fitted total field removes the barrier entirely.
    pub suppressed_points: usize,
}

impl FitReport {
    pub fn f_laser_gvm(&self) -> f64 {
        units::to_gvm(self.f_laser)
    }
    pub fn sigma_f_laser_gvm(&self) -> f64 {
        units::to_gvm(self.sigma_f_laser)
    }
    pub fn b_gvm(&self) -> f64 {
        units::to_gvm(self.b)
    }
}

/// Fits F_laser (and B when `fit_b`) to `(f_dc, ratio)` data by Levenberg-Marquardt on
/// log-ratio residuals. Parameters are optimised as logarithms so they stay positive.
pub fn fit_f_laser(data: &[(f64, f64)], p: &FNParams, fit_b: bool) -> Result<FitReport> {
    fit_f_laser_with(data, p, fit_b, &FitSettings::default())
}

pub fn fit_f_laser_with(data: &[(f64, f64)], p: &FNParams, fit_b: bool, settings: &FitSettings) -> Result<FitReport> {
    if data.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 data points, got {}", data.len())));
    }
    if data.iter().any(|&(d, r)| !(r > 0.0) || !(d >= 0.0) || !d.is_finite()) {
        return domain("ratios must be positive and static fields non-negative");
    }
    let r0 = data[0].1;
    if data.iter().all(|&(_, r)| ((r - r0) / r0).abs() < 1e-9) {
        return Err(Error::Degenerate(
            "ratio does not vary with the static field; F_laser and B are not identifiable".into(),
        ));
    }
    if fit_b && !(p.b > 0.0) {
        return domain("fitting B needs a positive starting value");
    }
    let np = if fit_b { 2 } else { 1 };
    let log_data: Vec<f64> = data.iter().map(|d| d.1.ln()).collect();

    let residuals = |theta: &[f64; 2]| -> Vec<f64> {
        let q = p.with_b(if fit_b { theta[1].exp() } else { p.b });
        data.iter()
            .zip(&log_data)
            .map(|(&(d, _), ld)| log_ratio(&q, theta[0].exp(), d).map(|m| m - ld).unwrap_or(f64::INFINITY))
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    // Jacobian with respect to the log parameters
    let jacobian = |theta: &[f64; 2]| -> Vec<[f64; 2]> {
        let fl = theta[0].exp();
        let q = p.with_b(if fit_b { theta[1].exp() } else { p.b });
        data.iter()
            .map(|&(d, _)| {
                let (gf, gb) = log_ratio_gradient(&q, fl, d);
                [gf * fl, if fit_b { gb * q.b } else { 0.0 }]
            })
            .collect()
    };

    // deterministic start: best F_laser on a log grid from 0.01 to 30 GV/m
    let mut theta = [0.0, if fit_b { p.b.ln() } else { 0.0 }];
    let mut best = f64::INFINITY;
    for i in 0..=400 {
        let fl = units::gvm(0.01 * 3000f64.powf(i as f64 / 400.0));
        let c = cost(&residuals(&[fl.ln(), theta[1]]));
        if c < best {
            best = c;
            theta[0] = fl.ln();
        }
    }
    if !best.is_finite() {
        return Err(Error::Fit("no starting F_laser gives a finite model".into()));
    }

    let mut lambda = 1e-3;
    let mut r = residuals(&theta);
    let mut c = cost(&r);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iterations {
        iterations += 1;
        let j = jacobian(&theta);
        let (jtj, jtr) = normal_equations(&j, &r, np);
        let mut accepted = false;
        for _ in 0..60 {
            let step = solve_damped(&jtj, &jtr, lambda, np);
            let Some(step) = step else {
                lambda *= 10.0;
                continue;
            };
            let trial = [theta[0] - step[0], theta[1] - step[1]];
            let rt = residuals(&trial);
            let ct = cost(&rt);
            if ct <= c {
                let small = step.iter().take(np).all(|s| s.abs() < settings.tolerance);
                theta = trial;
                r = rt;
                c = ct;
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
                converged = small;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: at a minimum to round-off
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence after {iterations} iterations, residual norm {:.3e}",
            c.sqrt()
        )));
    }

    let j = jacobian(&theta);
    let (jtj, _) = normal_equations(&j, &r, np);
    let cov = invert(&jtj, np).ok_or_else(|| Error::Degenerate("singular Jacobian at the optimum".into()))?;
    let dof = (data.len() - np).max(1) as f64;
    let s2 = c / dof;
    let fl = theta[0].exp();
    let b = if fit_b { theta[1].exp() } else { p.b };
    let fitted = p.with_b(b);
    Ok(FitReport {
        f_laser: fl,
        // log-parameter sigma times the parameter value
        sigma_f_laser: fl * (s2 * cov[0][0]).sqrt(),
        b,
        sigma_b: if fit_b { b * (s2 * cov[1][1]).sqrt() } else { 0.0 },
        fit_b,
        residual_norm: c.sqrt(),
        residuals: r,
        iterations,
        settings: *settings,
        suppressed_points: data.iter().filter(|&&(d, _)| fitted.barrier_suppressed(2.0 * fl + d)).count(),
    })
}

fn normal_equations(j: &[[f64; 2]], r: &[f64], np: usize) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut a = [[0.0; 2]; 2];
    let mut g = [0.0; 2];
    for (row, ri) in j.iter().zip(r) {
        for p in 0..np {
            g[p] += row[p] * ri;
            for q in 0..np {
                a[p][q] += row[p] * row[q];
            }
        }
    }
    (a, g)
}

fn solve_damped(a: &[[f64; 2]; 2], g: &[f64; 2], lambda: f64, np: usize) -> Option<[f64; 2]> {
    let mut m = *a;
    for p in 0..np {
        m[p][p] *= 1.0 + lambda;
    }
    let inv = invert(&m, np)?;
    let mut s = [0.0; 2];
    for p in 0..np {
        for q in 0..np {
            s[p] += inv[p][q] * g[q];
        }
    }
    Some(s)
}

/// Inverse of the leading `np`×`np` block with a conditioning guard.
fn invert(a: &[[f64; 2]; 2], np: usize) -> Option<[[f64; 2]; 2]> {
    if np == 1 {
        return (a[0][0] > 0.0 && a[0][0].is_finite()).then(|| [[1.0 / a[0][0], 0.0], [0.0, 0.0]]);
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0] * a[1][1];
    if !(det.abs() > 1e-13 * scale.abs()) || !det.is_finite() {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Reads `(f_dc_GVm, ratio)` rows from CSV with a header row naming those columns.
/// Returns static fields in atomic units.
pub fn read_ratio_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Config(format!("bad CSV header: {e}")))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("CSV is missing the `{name}` column")))
    };
    let (ci, ri) = (col("f_dc_GVm")?, col("ratio")?);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("CSV row {}: {e}", line + 1)))?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("CSV row {}: column {} is not a number", line + 1, i + 1)))
        };
        out.push((units::gvm(parse(ci)?), parse(ri)?));
    }
    Ok(out)
}
