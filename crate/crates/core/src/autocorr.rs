//! Interferometric autocorrelation: emitted charge versus the delay between two replica
//! pulses, from an instantaneous detector model or from full propagations.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field::{pair_with_offset, FieldConfiguration, LaserPulse};
use crate::fn_analytic::{fn_current, FNParams};
use crate::parallel::map_indexed;
use crate::simulation::Simulation;
use crate::units;

/// Instantaneous response used by the surrogate trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Detector {
    /// Rectified Fowler-Nordheim current: only barrier-lowering (positive) total fields emit.
    FowlerNordheim(FNParams),
    /// Signal ∝ (F²)^order. `order` 2 and 3 are the usual second- and third-order
    /// intensity detectors.
    IntensityPower(u32),
}

impl Detector {
    fn response(&self, f: f64) -> f64 {
        match self {
            Detector::FowlerNordheim(p) => {
                if f > 0.0 {
                    fn_current(p, f).unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            Detector::IntensityPower(order) => (f * f).powi(*order as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IACTrace {
    /// Delays (atomic units), as given.
    pub delays: Vec<f64>,
    /// Time-integrated emission per delay.
    pub currents: Vec<f64>,
    /// Maximum current over the baseline.
    pub peak_to_baseline: f64,
    /// Current averaged over one carrier period around zero delay, over the baseline.
    pub fringe_averaged_peak_to_baseline: f64,
    /// Mean current for delays beyond [`BASELINE_TAUS`]·τ.
    pub baseline: f64,
    /// (max − min)/mean of the baseline samples.
    pub baseline_spread: f64,
    /// Delays at or beyond this value (atomic units) form the baseline window.
    pub baseline_from: f64,
}

/// The baseline is taken from delays beyond this many pulse durations.
pub const BASELINE_TAUS: f64 = 5.0;

impl IACTrace {
    fn from_currents(delays: Vec<f64>, currents: Vec<f64>, tau: f64, period: f64) -> Result<Self> {
        let baseline_from = BASELINE_TAUS * tau;
        let plateau: Vec<f64> =
            delays.iter().zip(&currents).filter(|(d, _)| d.abs() > baseline_from).map(|(_, c)| *c).collect();
        if plateau.is_empty() {
            return Err(Error::Sampling(format!(
                "no delays beyond {BASELINE_TAUS}τ = {:.2} fs for the baseline",
                units::to_fs(baseline_from)
            )));
        }
        let baseline = plateau.iter().sum::<f64>() / plateau.len() as f64;
        if !(baseline > 0.0) {
            return domain("baseline current is not positive");
        }
        let hi = plateau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = plateau.iter().copied().fold(f64::INFINITY, f64::min);
        let peak = currents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let averaged = fringe_average_at_zero(&delays, &currents, period);
        Ok(Self {
            peak_to_baseline: peak / baseline,
            fringe_averaged_peak_to_baseline: averaged / baseline,
            baseline,
            baseline_spread: (hi - lo) / baseline,
            baseline_from,
            delays,
            currents,
        })
    }

    /// `delay_fs,current` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delay_fs,current\n");
        for (d, c) in self.delays.iter().zip(&self.currents) {
            out.push_str(&format!("{},{}\n", units::to_fs(*d), c));
        }
        out
    }
}

/// Mean of the trace over |delay| ≤ T/2, using the evenness of the trace to fold
/// negative delays onto positive ones. Trapezoid rule with linear interpolation at T/2.
fn fringe_average_at_zero(delays: &[f64], currents: &[f64], period: f64) -> f64 {
    let half = 0.5 * period;
    let mut pts: Vec<(f64, f64)> = delays.iter().map(|d| d.abs()).zip(currents.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    let mut area = 0.0;
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 >= half {
            break;
        }
        let (xe, ye) = if x1 > half { (half, y0 + (y1 - y0) * (half - x0) / (x1 - x0)) } else { (x1, y1) };
        area += 0.5 * (y0 + ye) * (xe - x0);
    }
    let covered = pts.iter().map(|p| p.0).fold(0.0, f64::max).min(half);
    if covered > 0.0 {
        area / covered
    } else {
        pts.first().map(|p| p.1).unwrap_or(0.0)
    }
}

/// Default delay grid: steps of T/16 until 4τ is reached, then 2 fs steps to `max_delay`.
pub fn default_delays(pulse: &LaserPulse, max_delay: f64) -> Vec<f64> {
    let fine = pulse.period() / 16.0;
    let edge = 4.0 * pulse.tau();
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let d = k as f64 * fine;
        if d > max_delay {
            break;
        }
        out.push(d);
        if d >= edge {
            break;
        }
        k += 1;
    }
    let coarse = units::fs(2.0);
    let start = *out.last().unwrap_or(&0.0);
    let mut k = 1;
    loop {
        let d = start + k as f64 * coarse;
        if d > max_delay + 1e-9 {
            break;
        }
        out.push(d);
        k += 1;
    }
    out
}

/// Checks ordering and fringe resolution inside the overlap region |delay| < 4τ.
fn validate_delays(pulse: &LaserPulse, delays: &[f64]) -> Result<()> {
    if delays.len() < 2 {
        return Err(Error::Sampling("need at least two delays".into()));
    }
    if delays.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Sampling("delays must be strictly increasing".into()));
    }
    let limit = pulse.period() / 8.0;
    let overlap = 4.0 * pulse.tau();
    for w in delays.windows(2) {
        if w[0].abs() < overlap && w[1] - w[0] > limit * (1.0 + 1e-9) {
            return Err(Error::Sampling(format!(
                "delay step {:.3} fs at {:.3} fs exceeds T/8 = {:.3} fs",
                units::to_fs(w[1] - w[0]),
                units::to_fs(w[0]),
                units::to_fs(limit)
            )));
        }
    }
    Ok(())
}

/// Samples per carrier period of the surrogate time integral.
const SURROGATE_SAMPLES_PER_PERIOD: f64 = 256.0;

/// Charge emitted by `cfg` above the static-field background.
fn surrogate_charge(cfg: &FieldConfiguration, detector: &Detector, period: f64) -> f64 {
    let Some((a, b)) = cfg.window() else {
        return 0.0;
    };
    let h = period / SURROGATE_SAMPLES_PER_PERIOD;
    let n = ((b - a) / h).ceil() as usize;
    let background = detector.response(cfg.f_dc);
    // the grid is anchored at a multiple of h so shifted copies of the same field sample identically
    let start = (a / h).floor() * h;
    let mut s = 0.0;
    for i in 0..=n + 1 {
        let t = start + i as f64 * h;
        s += detector.response(cfg.total_field(t)) - background;
    }
    s * h
}

/// Surrogate IAC: the detector responds to the instantaneous total field of the two
/// replicas plus `f_dc`. Negative delays are allowed; the trace is even in delay.
pub fn iac_trace_surrogate(pulse: &LaserPulse, f_dc: f64, detector: &Detector, delays: &[f64]) -> Result<IACTrace> {
    validate_delays(pulse, delays)?;
    let period = pulse.period();
    let currents: Vec<f64> = map_indexed(delays, |_, &d| {
        let cfg = pair_with_offset(pulse, d).with_dc(f_dc);
        surrogate_charge(&cfg, detector, period)
    });
    IACTrace::from_currents(delays.to_vec(), currents, pulse.tau(), period)
}

/// Surrogate charge of a single pulse; the large-delay currents are twice this value.
pub fn single_pulse_charge(pulse: &LaserPulse, f_dc: f64, detector: &Detector) -> f64 {
    surrogate_charge(&FieldConfiguration::single(*pulse).with_dc(f_dc), detector, pulse.period())
}

/// IAC from one propagation per delay; the current is the integrated detector flux.
pub fn iac_trace_tdse(sim: &Simulation, pulse: &LaserPulse, f_dc: f64, delays: &[f64]) -> Result<IACTrace> {
    validate_delays(pulse, delays)?;
    let currents = map_indexed(delays, |_, &d| {
        let cfg = pair_with_offset(pulse, d).with_dc(f_dc);
        sim.run(&cfg).map(|o| o.yield_)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    IACTrace::from_currents(delays.to_vec(), currents, pulse.tau(), pulse.period())
}
