//! Observables derived from flux traces: yield, electron pulse width, nonlinearity
//! exponent, predicted autocorrelation contrast and CE-phase modulation depth.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::parallel::map_indexed;
use crate::qdynamics::FluxTrace;
use crate::simulation::{OperatingPoint, Simulation};

/// Bursts separated by dips below this fraction of the peak flux are distinct sub-pulses.
pub const SUB_PULSE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionResult {
    pub yield_: f64,
    /// FWHM of the dominant burst (atomic units).
    pub pulse_fwhm: f64,
    pub peak_time: f64,
    pub sub_pulse_fractions: Vec<f64>,
    /// Index into `sub_pulse_fractions` of the burst holding the global maximum.
    pub dominant: usize,
}

/// Trapezoidal time integral of the flux.
pub fn integrate_yield(trace: &FluxTrace) -> Result<f64> {
    integrate_samples(&trace.j, trace.spacing())
}

fn integrate_samples(j: &[f64], h: f64) -> Result<f64> {
    match j.len() {
        0 => domain("cannot integrate an empty flux trace"),
        1 => Ok(j[0] * h),
        n => Ok(h * (j.iter().sum::<f64>() - 0.5 * (j[0] + j[n - 1]))),
    }
}

/// Dominant-burst FWHM and sub-pulse decomposition of a flux trace.
pub fn pulse_width(trace: &FluxTrace) -> Result<EmissionResult> {
    pulse_width_samples(&trace.times, &trace.j)
}

pub fn pulse_width_samples(times: &[f64], j: &[f64]) -> Result<EmissionResult> {
    if j.is_empty() || times.len() != j.len() {
        return domain("flux trace is empty or inconsistent");
    }
    let (imax, &jmax) = j.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if !(jmax > 0.0) {
        return domain("flux trace has no positive maximum");
    }
    let h = if times.len() > 1 { times[1] - times[0] } else { 1.0 };

    let half = 0.5 * jmax;
    let mut l = imax;
    while l > 0 && j[l - 1] >= half {
        l -= 1;
    }
    let mut r = imax;
    while r + 1 < j.len() && j[r + 1] >= half {
        r += 1;
    }
    let cross = |a: usize, b: usize| -> f64 {
        // linear interpolation between a sample below half (a) and one above (b)
        let (ja, jb) = (j[a], j[b]);
        times[a] + (times[b] - times[a]) * (half - ja) / (jb - ja)
    };
    let t_left = if l > 0 { cross(l - 1, l) } else { times[0] };
    let t_right = if r + 1 < j.len() { cross(r + 1, r) } else { times[j.len() - 1] };

    // burst cores: maximal runs above threshold
    let thr = SUB_PULSE_THRESHOLD * jmax;
    let mut cores: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in j.iter().enumerate() {
        match (v > thr, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                cores.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        cores.push((s, j.len() - 1));
    }
    // partition at the flux minimum between neighbouring cores; every sample belongs to one burst
    let mut edges = vec![0usize];
    for w in cores.windows(2) {
        let (a, b) = (w[0].1, w[1].0);
        let cut = (a..=b).min_by(|&x, &y| j[x].total_cmp(&j[y])).unwrap_or(b);
        edges.push(cut);
    }
    edges.push(j.len());
    let total = integrate_samples(j, h)?;
    let mut fractions = Vec::with_capacity(cores.len());
    let mut dominant = 0;
    for (bi, e) in edges.windows(2).enumerate() {
        let part: f64 = j[e[0]..e[1]].iter().sum::<f64>() * h;
        fractions.push(part);
        if (e[0]..e[1]).contains(&imax) {
            dominant = bi;
        }
    }
    // the trapezoid end corrections belong to the outermost bursts
    let n = j.len();
    if let Some(first) = fractions.first_mut() {
        *first -= 0.5 * h * j[0];
    }
    if let Some(last) = fractions.last_mut() {
        *last -= 0.5 * h * j[n - 1];
    }
    if total > 0.0 {
        for f in &mut fractions {
            *f /= total;
        }
    }

    Ok(EmissionResult {
        yield_: total,
        pulse_fwhm: t_right - t_left,
        peak_time: times[imax],
        sub_pulse_fractions: fractions,
        dominant,
    })
}

/// Least-squares slope of ln(yield) against ln(fluence).
pub fn nonlinearity_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return domain("fluences and yields must be positive");
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-24 * (1.0 + mx * mx)) {
        return Err(Error::Fit("fluence values are degenerate".into()));
    }
    Ok(sxy / sxx)
}

/// Interferometric peak-to-baseline ratio 2^(2n-1) of a detector with yield ∝ fluence^n.
pub fn peak_to_baseline_from_exponent(n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return domain(format!("exponent must be at least 1, got {n}"));
    }
    Ok((2.0 * n - 1.0).exp2())
}

/// Yields sampled over a CE-phase grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationScan {
    pub phases: Vec<f64>,
    pub yields: Vec<f64>,
    pub depth: f64,
}

impl ModulationScan {
    pub fn from_yields(phases: Vec<f64>, yields: Vec<f64>) -> Result<Self> {
        if phases.len() != yields.len() || yields.is_empty() {
            return domain("phase and yield lists must be non-empty and equally long");
        }
        let depth = modulation_depth(&yields)?;
        Ok(Self { phases, yields, depth })
    }

    /// Phase with the largest yield.
    pub fn best_phase(&self) -> f64 {
        let i = self.yields.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        self.phases[i]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase_rad,yield\n");
        for (p, y) in self.phases.iter().zip(&self.yields) {
            out.push_str(&format!("{p:e},{y:e}\n"));
        }
        out
    }
}

/// (max - min) / (max + min) over the sampled values.
pub fn modulation_depth(yields: &[f64]) -> Result<f64> {
    if yields.is_empty() {
        return domain("no yields");
    }
    let max = yields.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = yields.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= 0.0) {
        return domain("yields must be non-negative");
    }
    if max + min == 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / (max + min))
}

/// Evenly spaced phases k·2π/n on [0, 2π).
pub fn phase_grid(n_phases: usize) -> Vec<f64> {
    (0..n_phases).map(|k| k as f64 * TAU / n_phases as f64).collect()
}

/// CE-phase scan: one propagation per phase of an `n_phases` grid at `op`.
pub fn ce_modulation_scan(sim: &Simulation, op: &OperatingPoint, n_phases: usize) -> Result<ModulationScan> {
    if n_phases < 8 {
        return domain(format!("a phase scan needs at least 8 phases, got {n_phases}"));
    }
    let phases = phase_grid(n_phases);
    let yields =
        map_indexed(&phases, |_, &phi| sim.yield_of(&op.with_phase(phi))).into_iter().collect::<Result<Vec<_>>>()?;
    ModulationScan::from_yields(phases, yields)
}

/// Relative fluence step of the centred difference used for the local exponent.
pub const EXPONENT_STEP: f64 = 0.1;

/// Interferometric contrast predicted from single-pulse simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakToBaseline {
    /// Local exponent d ln Y / d ln fluence from yields at fluence × (1 ± 0.1).
    pub exponent: f64,
    /// 2^(2n-1).
    pub from_exponent: f64,
    /// Y(2F₀) / (2 Y(F₀)): coherent overlap against two separated pulses.
    pub direct: f64,
    pub yield_single: f64,
    pub yield_doubled: f64,
}

/// Both peak-to-baseline routes at one operating point.
pub fn predict_peak_to_baseline(sim: &Simulation, op: &OperatingPoint) -> Result<PeakToBaseline> {
    let s = EXPONENT_STEP;
    // fluence ∝ F₀², so fluence × (1 ± s) means field × √(1 ± s)
    let points = [
        op.with_laser_field(op.f_laser_gvm * (1.0 - s).sqrt()),
        op.with_laser_field(op.f_laser_gvm * (1.0 + s).sqrt()),
        *op,
        op.with_laser_field(2.0 * op.f_laser_gvm),
    ];
    let y = map_indexed(&points, |_, p| sim.yield_of(p)).into_iter().collect::<Result<Vec<_>>>()?;
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("non-positive yield in the exponent stencil".into()));
    }
    let exponent = (y[1] / y[0]).ln() / ((1.0 + s) / (1.0 - s)).ln();
    Ok(PeakToBaseline {
        exponent,
        from_exponent: peak_to_baseline_from_exponent(exponent)?,
        direct: y[3] / (2.0 * y[2]),
        yield_single: y[2],
        yield_doubled: y[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gaussian_trace(h: f64, centers: &[f64], fwhm: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let s = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let times: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let j = times.iter().map(|t| centers.iter().map(|c| (-(t - c).powi(2) / (2.0 * s * s)).exp()).sum()).collect();
        (times, j)
    }

    #[test]
    fn yield_of_simple_traces() {
        assert_eq!(integrate_samples(&[0.0; 10], 0.5).unwrap(), 0.0);
        // constant flux over duration T = (n-1)h
        let y = integrate_samples(&[2.0; 11], 0.3).unwrap();
        assert_relative_eq!(y, 2.0 * 3.0, max_relative = 1e-14);
        assert!(integrate_samples(&[], 1.0).is_err());
    }

    #[test]
    fn synthetic_660_as_burst() {
        let fwhm = crate::units::fs(0.66);
        let h = 0.2;
        let (t, j) = gaussian_trace(h, &[400.0], fwhm, 4000);
        let r = pulse_width_samples(&t, &j).unwrap();
        assert!((r.pulse_fwhm - fwhm).abs() < h, "{} vs {}", r.pulse_fwhm, fwhm);
        assert_eq!(r.sub_pulse_fractions.len(), 1);
        assert_relative_eq!(r.sub_pulse_fractions[0], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn two_equal_bursts() {
        let fwhm = 20.0;
        let (t, j) = gaussian_trace(0.25, &[300.0, 600.0], fwhm, 4000);
        let r = pulse_width_samples(&t, &j).unwrap();
        assert!((r.pulse_fwhm - fwhm).abs() < 0.25);
        assert_eq!(r.sub_pulse_fractions.len(), 2);
        for f in &r.sub_pulse_fractions {
            assert!((f - 0.5).abs() < 1e-6);
        }
        assert_relative_eq!(r.sub_pulse_fractions.iter().sum::<f64>(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn non_positive_trace_rejected() {
        assert!(pulse_width_samples(&[0.0, 1.0], &[0.0, -1.0]).is_err());
        assert!(pulse_width_samples(&[], &[]).is_err());
    }

    #[test]
    fn exponent_of_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 9.0].iter().map(|&x: &f64| (x, 0.7 * x.powi(3))).collect();
        assert!((nonlinearity_exponent(&pts).unwrap() - 3.0).abs() < 1e-10);
        let scaled: Vec<_> = pts.iter().map(|&(x, y)| (x, 1e-9 * y)).collect();
        assert!((nonlinearity_exponent(&scaled).unwrap() - 3.0).abs() < 1e-10);
        assert!(nonlinearity_exponent(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(nonlinearity_exponent(&pts[..2]).is_err());
    }

    #[test]
    fn exponent_of_fn_surrogate() {
        // yield ∝ F² exp(-B/F), fluence ∝ F²: d ln Y / d ln fluence = 1 + B/(2F)
        let b = 14.8f64;
        let f = 2.0f64;
        let pts: Vec<_> = [-1e-4f64, 0.0, 1e-4]
            .iter()
            .map(|e| {
                let ff = f * (1.0 + e);
                (ff * ff, ff * ff * (-b / ff).exp())
            })
            .collect();
        let n = nonlinearity_exponent(&pts).unwrap();
        assert!((n - (1.0 + b / (2.0 * f))).abs() < 1e-6, "{n}");
    }

    #[test]
    fn ratio_from_exponent() {
        assert_relative_eq!(peak_to_baseline_from_exponent(2.0).unwrap(), 8.0);
        assert_relative_eq!(peak_to_baseline_from_exponent(3.0).unwrap(), 32.0);
        assert_relative_eq!(peak_to_baseline_from_exponent(1.0).unwrap(), 2.0);
        assert!(peak_to_baseline_from_exponent(0.5).is_err());
    }

    #[test]
    fn flat_yields_have_zero_depth() {
        let s = ModulationScan::from_yields(phase_grid(16), vec![3.0; 16]).unwrap();
        assert_eq!(s.depth, 0.0);
        let s = ModulationScan::from_yields(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_relative_eq!(s.depth, 0.5);
    }

    proptest! {
        #[test]
        fn depth_scale_invariant(ys in proptest::collection::vec(0.1f64..10.0, 2..32), s in 1e-6f64..1e6) {
            let a = modulation_depth(&ys).unwrap();
            let scaled: Vec<f64> = ys.iter().map(|y| y * s).collect();
            let b = modulation_depth(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn width_invariant_under_scale_and_shift(scale in 1e-8f64..1e3, shift in -1e3f64..1e3) {
            let (t, j) = gaussian_trace(0.5, &[200.0, 260.0], 15.0, 1000);
            let base = pulse_width_samples(&t, &j).unwrap();
            let t2: Vec<f64> = t.iter().map(|x| x + shift).collect();
            let j2: Vec<f64> = j.iter().map(|x| x * scale).collect();
            let moved = pulse_width_samples(&t2, &j2).unwrap();
            prop_assert!((base.pulse_fwhm - moved.pulse_fwhm).abs() < 1e-9);
            prop_assert!((base.peak_time + shift - moved.peak_time).abs() < 1e-9);
            for (a, b) in base.sub_pulse_fractions.iter().zip(&moved.sub_pulse_fractions) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
