//! The 1D metal-vacuum model potential.
//!
//! Flat interior at `v0` for z ≤ 0, image potential -1/(4z) outside (atomic units,
//! the SI form is -q²/(16πε₀z)), tilted by -z·F(t). The image term is clamped to
//! `v0` below the cutoff z_c = 1/(4|v0|) where it would dive beneath the floor.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::field::FieldConfiguration;
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetalModel {
    /// Interior potential energy (negative).
    pub v0: f64,
    pub work_function: f64,
    /// Width L of the interior; the hard wall sits at z = -L.
    pub well_width: f64,
}

impl Default for MetalModel {
    /// Tungsten-like defaults: V₀ = -13.5 eV, Φ = 4.5 eV, L from the infinite-well estimate.
    fn default() -> Self {
        let v0 = units::ev(-13.5);
        let work_function = units::ev(4.5);
        Self { v0, work_function, well_width: infinite_well_width(v0, -work_function) }
    }
}

/// Width of an infinite well with floor `v0` whose lowest level sits at `target`.
pub fn infinite_well_width(v0: f64, target: f64) -> f64 {
    std::f64::consts::PI / (2.0 * (target - v0)).sqrt()
}

impl MetalModel {
    pub fn new(v0: f64, work_function: f64, well_width: f64) -> Result<Self> {
        if !(work_function > 0.0) {
            return domain(format!("work function must be positive, got {work_function}"));
        }
        if !(v0 < -work_function) {
            return domain(format!("interior potential {v0} must lie below the Fermi level {}", -work_function));
        }
        if !(well_width > 0.0) {
            return domain(format!("well width must be positive, got {well_width}"));
        }
        Ok(Self { v0, work_function, well_width })
    }

    pub fn from_practical(v0_ev: f64, work_function_ev: f64, well_width_nm: f64) -> Result<Self> {
        Self::new(units::ev(v0_ev), units::ev(work_function_ev), units::nm(well_width_nm))
    }

    pub fn with_well_width(mut self, l: f64) -> Self {
        self.well_width = l;
        self
    }

    /// Position where the image potential meets the interior floor.
    pub fn image_cutoff(&self) -> f64 {
        1.0 / (4.0 * self.v0.abs())
    }

    /// Zero-field part of the potential.
    pub fn static_potential(&self, z: f64) -> f64 {
        if z <= self.image_cutoff() {
            self.v0
        } else {
            -0.25 / z
        }
    }

    /// Coefficient multiplying -F(t) at `z`: the field only acts outside the clamp region.
    pub fn field_lever(&self, z: f64) -> f64 {
        if z > self.image_cutoff() {
            z
        } else {
            0.0
        }
    }

    pub fn potential(&self, z: f64, field: f64) -> f64 {
        self.static_potential(z) - self.field_lever(z) * field
    }
}

/// V(z, t) for the given field configuration. `z` must not lie behind the hard wall.
pub fn potential_at(metal: &MetalModel, cfg: &FieldConfiguration, z: f64, t: f64) -> Result<f64> {
    if !z.is_finite() || z < -metal.well_width {
        return domain(format!("z = {z} lies outside the simulation domain (wall at {})", -metal.well_width));
    }
    Ok(metal.potential(z, cfg.total_field(t)))
}

/// Location and height of the Schottky barrier top for a static field `f`.
pub fn barrier_maximum(metal: &MetalModel, f: f64) -> Result<(f64, f64)> {
    if !(f > 0.0) {
        return domain(format!("barrier has no maximum for field {f}"));
    }
    let zc = metal.image_cutoff();
    let z_star = 0.5 / f.sqrt();
    if z_star > zc {
        Ok((z_star, -f.sqrt()))
    } else {
        // the field is so strong that the peak is inside the clamp; the top is the clamp edge
        Ok((zc, metal.potential(zc * (1.0 + f64::EPSILON), f)))
    }
}
