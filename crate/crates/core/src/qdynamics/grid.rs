use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::potential::MetalModel;
use crate::units;

/// Uniform grid from the hard wall at `z_min = -L` to `z_max`, with detector plane
/// and absorbing layer `[z_max - absorber_width, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub detector: f64,
    pub absorber_width: f64,
}

/// Everything about the grid except the well width, which calibration decides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridTemplate {
    pub z_max: f64,
    pub n_points: usize,
    pub detector: f64,
    pub absorber_width: f64,
}

impl Default for GridTemplate {
    fn default() -> Self {
        Self { z_max: units::nm(40.0), n_points: 16_384, detector: units::nm(6.0), absorber_width: units::nm(5.0) }
    }
}

/// Points per well width required to resolve the lowest level to ~1 meV.
pub const POINTS_PER_WELL: f64 = 64.0;

impl GridTemplate {
    pub fn for_well(&self, well_width: f64) -> GridSpec {
        GridSpec {
            z_min: -well_width,
            z_max: self.z_max,
            n_points: self.n_points,
            detector: self.detector,
            absorber_width: self.absorber_width,
        }
    }

    /// Smallest point count giving dz ≤ L/64 for the given well width.
    pub fn resolved_for(mut self, well_width: f64) -> Self {
        let needed = ((self.z_max + well_width) * POINTS_PER_WELL / well_width).ceil() as usize + 1;
        self.n_points = self.n_points.max(needed);
        self
    }
}

impl GridSpec {
    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_points - 1) as f64
    }

    pub fn z(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.z_max
        } else {
            self.z_min + i as f64 * self.dz()
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.z(i)).collect()
    }

    pub fn absorber_start(&self) -> f64 {
        self.z_max - self.absorber_width
    }

    /// Nearest grid index to `z`.
    pub fn index_of(&self, z: f64) -> usize {
        let i = ((z - self.z_min) / self.dz()).round();
        (i.max(0.0) as usize).min(self.n_points - 1)
    }

    /// Left node of the grid link whose midpoint is closest to the detector plane.
    pub fn detector_link(&self) -> usize {
        let i = ((self.detector - self.z_min) / self.dz() - 0.5).round();
        (i.max(1.0) as usize).min(self.n_points - 3)
    }

    /// Actual detector position: midpoint of the detector link.
    pub fn detector_plane(&self) -> f64 {
        self.z(self.detector_link()) + 0.5 * self.dz()
    }

    pub fn validate(&self, metal: &MetalModel) -> Result<()> {
        if self.n_points < 8 {
            return domain(format!("grid needs at least 8 points, got {}", self.n_points));
        }
        if !(self.z_max > self.z_min) {
            return domain("grid upper edge must exceed the lower edge");
        }
        let zc = metal.image_cutoff();
        if !(zc < self.detector && self.detector < self.absorber_start() && self.absorber_start() < self.z_max) {
            return domain(format!(
                "need z_c < z_d < z_a < z_max, got {zc:.4} / {:.4} / {:.4} / {:.4} bohr",
                self.detector,
                self.absorber_start(),
                self.z_max
            ));
        }
        if !(self.absorber_width > 0.0) {
            return domain("absorber width must be positive");
        }
        Ok(())
    }
}

/// Wavefunction samples on a grid at time `t`. Endpoint samples are held at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    pub grid: GridSpec,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl QuantumState {
    pub fn new(grid: GridSpec, psi: Vec<Complex64>, t: f64) -> Result<Self> {
        if psi.len() != grid.n_points {
            return domain(format!("wavefunction has {} samples for a {}-point grid", psi.len(), grid.n_points));
        }
        let mut s = Self { grid, psi, t };
        s.psi[0] = Complex64::new(0.0, 0.0);
        let n = s.psi.len();
        s.psi[n - 1] = Complex64::new(0.0, 0.0);
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dz()
    }

    /// Probability on the grid nodes with index `< end`.
    pub fn norm_below(&self, end: usize) -> f64 {
        self.psi[..end].iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dz()
    }

    pub fn normalize(&mut self) {
        let s = self.norm().sqrt();
        if s > 0.0 {
            for c in &mut self.psi {
                *c /= s;
            }
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨ψ|H|ψ⟩/⟨ψ|ψ⟩ for a real potential sampled on the grid (finite-difference kinetic term).
    pub fn energy(&self, potential: &[f64]) -> f64 {
        let dz = self.grid.dz();
        let k = 0.5 / (dz * dz);
        let n = self.psi.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..n - 1 {
            let h = self.psi[i] * (2.0 * k + potential[i]) - (self.psi[i - 1] + self.psi[i + 1]) * k;
            num += (self.psi[i].conj() * h).re;
            den += self.psi[i].norm_sqr();
        }
        num / den
    }
}
