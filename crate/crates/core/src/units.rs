//! Physical constants and Hartree atomic units.
//!
//! Everything inside the crate is computed in atomic units (ħ = m_e = e = 4πε₀ = 1).
//! Values enter and leave in practical units (eV, nm, fs, GV/m, J/m², V) through
//! [`Unit`] and the helper functions below.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// SI constants (CODATA 2018).
pub mod si {
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const PLANCK: f64 = 6.626_070_15e-34;
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
}

pub const HARTREE_EV: f64 = 27.211_386_245_988;
pub const BOHR_NM: f64 = 0.052_917_721_090_3;
pub const AU_TIME_FS: f64 = 0.024_188_843_265_857;
/// Atomic unit of electric field in GV/m.
pub const AU_FIELD_GVM: f64 = 514.220_674_763;
/// Atomic unit of electric potential in volts.
pub const AU_POTENTIAL_V: f64 = HARTREE_EV;
/// Speed of light in atomic units (1/α).
pub const SPEED_OF_LIGHT_AU: f64 = 137.035_999_084;

const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
const BOHR_M: f64 = 5.291_772_109_03e-11;

/// Atomic unit of fluence (E_h / a₀²) in J/m².
pub fn au_fluence_jm2() -> f64 {
    HARTREE_J / (BOHR_M * BOHR_M)
}

/// Practical units accepted at the crate boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    ElectronVolt,
    Nanometer,
    Femtosecond,
    Attosecond,
    GigavoltPerMeter,
    JoulePerSquareMeter,
    Volt,
}

impl Unit {
    pub const ALL: [Unit; 7] = [
        Unit::ElectronVolt,
        Unit::Nanometer,
        Unit::Femtosecond,
        Unit::Attosecond,
        Unit::GigavoltPerMeter,
        Unit::JoulePerSquareMeter,
        Unit::Volt,
    ];

    /// Size of one atomic unit expressed in this unit.
    pub fn atomic_scale(self) -> f64 {
        match self {
            Unit::ElectronVolt => HARTREE_EV,
            Unit::Nanometer => BOHR_NM,
            Unit::Femtosecond => AU_TIME_FS,
            Unit::Attosecond => AU_TIME_FS * 1e3,
            Unit::GigavoltPerMeter => AU_FIELD_GVM,
            Unit::JoulePerSquareMeter => au_fluence_jm2(),
            Unit::Volt => AU_POTENTIAL_V,
        }
    }

    pub fn to_atomic(self, value: f64) -> f64 {
        value / self.atomic_scale()
    }

    pub fn from_atomic(self, value: f64) -> f64 {
        value * self.atomic_scale()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::ElectronVolt => "eV",
            Unit::Nanometer => "nm",
            Unit::Femtosecond => "fs",
            Unit::Attosecond => "as",
            Unit::GigavoltPerMeter => "GV/m",
            Unit::JoulePerSquareMeter => "J/m^2",
            Unit::Volt => "V",
        }
    }
}

pub fn ev(x: f64) -> f64 {
    Unit::ElectronVolt.to_atomic(x)
}

pub fn nm(x: f64) -> f64 {
    Unit::Nanometer.to_atomic(x)
}

pub fn fs(x: f64) -> f64 {
    Unit::Femtosecond.to_atomic(x)
}

pub fn gvm(x: f64) -> f64 {
    Unit::GigavoltPerMeter.to_atomic(x)
}

pub fn to_ev(x: f64) -> f64 {
    Unit::ElectronVolt.from_atomic(x)
}

pub fn to_nm(x: f64) -> f64 {
    Unit::Nanometer.from_atomic(x)
}

pub fn to_fs(x: f64) -> f64 {
    Unit::Femtosecond.from_atomic(x)
}

pub fn to_gvm(x: f64) -> f64 {
    Unit::GigavoltPerMeter.from_atomic(x)
}

/// Carrier angular frequency (atomic units) for a vacuum wavelength in nm.
pub fn wavelength_to_omega(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_AU / nm(wavelength_nm)
}

/// sqrt(π / (4 ln 2)): ∫ exp(-4 ln2 t²/τ²) dt = τ·FLUENCE_SHAPE.
fn fluence_shape() -> f64 {
    (std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt()
}

/// Peak field (V/m) of a Gaussian pulse with field envelope exp(-2 ln2 t²/τ²)
/// that carries `fluence` (J/m²), using the cycle-averaged intensity ½cε₀F₀².
pub fn fluence_to_peak_field(fluence_jm2: f64, tau_s: f64) -> Result<f64> {
    if !(tau_s > 0.0) {
        return domain(format!("pulse duration must be positive, got {tau_s}"));
    }
    if !(fluence_jm2 >= 0.0) {
        return domain(format!("fluence must be non-negative, got {fluence_jm2}"));
    }
    let denom = 0.5 * si::SPEED_OF_LIGHT * si::EPSILON_0 * tau_s * fluence_shape();
    Ok((fluence_jm2 / denom).sqrt())
}

/// Inverse of [`fluence_to_peak_field`].
pub fn peak_field_to_fluence(field_vm: f64, tau_s: f64) -> Result<f64> {
    if !(tau_s > 0.0) {
        return domain(format!("pulse duration must be positive, got {tau_s}"));
    }
    if !(field_vm >= 0.0) {
        return domain(format!("peak field must be non-negative, got {field_vm}"));
    }
    Ok(0.5 * si::SPEED_OF_LIGHT * si::EPSILON_0 * field_vm * field_vm * tau_s * fluence_shape())
}

/// Practical-unit wrappers: GV/m, fs, J/m².
pub fn fluence_to_peak_field_gvm(fluence_jm2: f64, tau_fs: f64) -> Result<f64> {
    Ok(fluence_to_peak_field(fluence_jm2, tau_fs * 1e-15)? * 1e-9)
}

pub fn peak_field_to_fluence_jm2(field_gvm: f64, tau_fs: f64) -> Result<f64> {
    peak_field_to_fluence(field_gvm * 1e9, tau_fs * 1e-15)
}

/// Apex field of a sharp tip, F = U / (k r). Volts and metres in, V/m out.
pub fn tip_voltage_to_field(voltage: f64, radius_m: f64, k: f64) -> Result<f64> {
    if !(radius_m > 0.0) {
        return domain(format!("tip radius must be positive, got {radius_m}"));
    }
    if !(k > 0.0) {
        return domain(format!("geometric factor must be positive, got {k}"));
    }
    Ok(voltage / (k * radius_m))
}

/// Keldysh parameter γ = ω√(2mΦ)/(qF), all arguments in atomic units.
pub fn keldysh_parameter(field: f64, work_function: f64, omega: f64) -> Result<f64> {
    if !(field > 0.0) {
        return domain("Keldysh parameter diverges for zero field");
    }
    if !(work_function > 0.0) {
        return domain(format!("work function must be positive, got {work_function}"));
    }
    if !(omega >= 0.0) {
        return domain(format!("angular frequency must be non-negative, got {omega}"));
    }
    Ok(omega * (2.0 * work_function).sqrt() / field)
}
