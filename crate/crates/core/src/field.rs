//! Driving fields: Gaussian-envelope carrier pulses on top of a static bias.

use std::f64::consts::{LN_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::units::{self, SPEED_OF_LIGHT_AU};

/// Half-width of the evaluation window in units of τ. Outside it the pulse is exactly zero.
pub const WINDOW_TAUS: f64 = 4.0;

/// One carrier pulse, F₀ exp(-2 ln2 (t-t₀)²/τ²) cos(ω(t-t₀) + φ). Atomic units.
///
/// τ is the FWHM of the intensity envelope. The CE phase is referenced to the
/// envelope maximum and stored reduced to [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserPulse {
    f0: f64,
    tau: f64,
    omega: f64,
    phi: f64,
    t0: f64,
}

/// Reduces `phi` to [0, 2π). Phases within ~1e-13 rad of a multiple of 2π/2²⁴ are
/// snapped onto that multiple, so grid phases such as k·2π/16 map to the same bits
/// whichever turn they were given in.
fn canonical_phase(phi: f64) -> f64 {
    const SLOTS: f64 = 16_777_216.0;
    let turns = phi.rem_euclid(TAU) / TAU * SLOTS;
    let q = turns.round();
    let reduced = if (turns - q).abs() < 1e-6 { q * TAU / SLOTS } else { phi.rem_euclid(TAU) };
    if reduced >= TAU {
        0.0
    } else {
        reduced
    }
}

impl LaserPulse {
    pub fn new(f0: f64, tau: f64, omega: f64, phi: f64, t0: f64) -> Result<Self> {
        if !(f0 >= 0.0) || !f0.is_finite() {
            return domain(format!("peak field must be non-negative, got {f0}"));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return domain(format!("pulse duration must be positive, got {tau}"));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return domain(format!("carrier frequency must be positive, got {omega}"));
        }
        if !phi.is_finite() || !t0.is_finite() {
            return domain("phase and center time must be finite");
        }
        Ok(Self { f0, tau, omega, phi: canonical_phase(phi), t0 })
    }

    /// Peak field in GV/m, duration in fs, wavelength in nm, center in fs.
    pub fn from_practical(f0_gvm: f64, tau_fs: f64, wavelength_nm: f64, phi: f64, t0_fs: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0) {
            return domain(format!("wavelength must be positive, got {wavelength_nm}"));
        }
        Self::new(
            units::gvm(f0_gvm),
            units::fs(tau_fs),
            units::wavelength_to_omega(wavelength_nm),
            phi,
            units::fs(t0_fs),
        )
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }
    /// Number of optical cycles inside the intensity FWHM.
    pub fn cycles(&self) -> f64 {
        self.tau / self.period()
    }
    pub fn wavelength_nm(&self) -> f64 {
        units::to_nm(TAU * SPEED_OF_LIGHT_AU / self.omega)
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phi = canonical_phase(phi);
        self
    }
    pub fn with_peak_field(mut self, f0: f64) -> Self {
        self.f0 = f0.max(0.0);
        self
    }
    pub fn with_center(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// (start, end) of the support window t₀ ± 4τ.
    pub fn window(&self) -> (f64, f64) {
        let h = WINDOW_TAUS * self.tau;
        (self.t0 - h, self.t0 + h)
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let s = t - self.t0;
        if s.abs() > WINDOW_TAUS * self.tau {
            return 0.0;
        }
        self.f0 * (-2.0 * LN_2 * s * s / (self.tau * self.tau)).exp()
    }

    pub fn field(&self, t: f64) -> f64 {
        let env = self.envelope(t);
        if env == 0.0 {
            return 0.0;
        }
        env * (self.omega * (t - self.t0) + self.phi).cos()
    }

    /// Cycle-averaged fluence ½cε₀F₀²τ√(π/(4 ln2)) in J/m².
    pub fn fluence_jm2(&self) -> f64 {
        units::peak_field_to_fluence(units::to_gvm(self.f0) * 1e9, units::to_fs(self.tau) * 1e-15)
            .expect("pulse invariants guarantee a valid duration")
    }
}

/// Field value of a single pulse at time `t`.
pub fn pulse_field(p: &LaserPulse, t: f64) -> f64 {
    p.field(t)
}

/// Static bias plus a superposition of pulses. Atomic units.
///
/// The enhancement factor multiplies the optical part only; `f_dc` is already
/// the field at the tip apex. Positive field lowers the barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfiguration {
    pub f_dc: f64,
    pub pulses: Vec<LaserPulse>,
    pub enhancement: f64,
}

impl Default for FieldConfiguration {
    fn default() -> Self {
        Self { f_dc: 0.0, pulses: Vec::new(), enhancement: 1.0 }
    }
}

impl FieldConfiguration {
    pub fn dc_only(f_dc: f64) -> Self {
        Self { f_dc, ..Self::default() }
    }

    pub fn single(pulse: LaserPulse) -> Self {
        Self { pulses: vec![pulse], ..Self::default() }
    }

    pub fn with_dc(mut self, f_dc: f64) -> Self {
        self.f_dc = f_dc;
        self
    }

    pub fn with_enhancement(mut self, xi: f64) -> Self {
        self.enhancement = xi;
        self
    }

    pub fn with_pulse(mut self, p: LaserPulse) -> Self {
        self.pulses.push(p);
        self
    }

    pub fn optical_field(&self, t: f64) -> f64 {
        self.enhancement * self.pulses.iter().map(|p| p.field(t)).sum::<f64>()
    }

    pub fn total_field(&self, t: f64) -> f64 {
        self.f_dc + self.optical_field(t)
    }

    /// Union of the pulse windows, or `None` without pulses.
    pub fn window(&self) -> Option<(f64, f64)> {
        self.pulses.iter().map(LaserPulse::window).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// Shortest carrier period among the pulses.
    pub fn min_period(&self) -> Option<f64> {
        self.pulses.iter().map(LaserPulse::period).reduce(f64::min)
    }

    /// Instantaneous-Poynting fluence ∫ c ε₀ F_opt(t)² dt of the optical field in J/m²,
    /// by composite Simpson quadrature over the window.
    pub fn optical_fluence_jm2(&self) -> f64 {
        let Some((a, b)) = self.window() else {
            return 0.0;
        };
        let period = self.min_period().unwrap_or(1.0);
        let mut n = ((b - a) / (period / 256.0)).ceil() as usize;
        n += n % 2;
        let h = (b - a) / n as f64;
        let f2 = |t: f64| self.optical_field(t).powi(2);
        let mut s = f2(a) + f2(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f2(a + i as f64 * h);
        }
        // c ε₀ F² in atomic units is c F² / (4π)
        let fluence_au = SPEED_OF_LIGHT_AU / (4.0 * PI) * s * h / 3.0;
        fluence_au * units::au_fluence_jm2()
    }
}

pub fn total_field(cfg: &FieldConfiguration, t: f64) -> f64 {
    cfg.total_field(t)
}

/// Two replicas of `p` with the second delayed by `delay`: the interferometer output.
pub fn delayed_pair(p: &LaserPulse, delay: f64) -> Result<FieldConfiguration> {
    if !(delay >= 0.0) {
        return domain(format!("delay must be non-negative, got {delay}"));
    }
    Ok(pair_with_offset(p, delay))
}

/// Like [`delayed_pair`] but accepts either sign of delay.
pub(crate) fn pair_with_offset(p: &LaserPulse, delay: f64) -> FieldConfiguration {
    FieldConfiguration { f_dc: 0.0, pulses: vec![*p, p.with_center(p.t0 + delay)], enhancement: 1.0 }
}
