//! Calibrated simulation setup and single-run driver.
//!
//! A [`Simulation`] owns the calibrated metal together with its grid and field-free ground state.
//! It is immutable once prepared, so one instance is shared by every run of a scan.

use serde::{Deserialize, Serialize};

use crate::emission::{integrate_yield, pulse_width, EmissionResult};
use crate::error::{domain, Result};
use crate::field::{FieldConfiguration, LaserPulse};
use crate::potential::MetalModel;
use crate::qdynamics::{
    calibrate_resolved, ground_state, propagate, Calibration, FluxTrace, GridSpec, GridTemplate, PropagationReport,
    QuantumState, SolverSettings,
};
use crate::units;

/// Single-pulse operating point in practical units. `f_laser_gvm` is the peak field at
/// the tip, after enhancement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub f_laser_gvm: f64,
    pub f_dc_gvm: f64,
    pub tau_fs: f64,
    pub wavelength_nm: f64,
    pub phi_rad: f64,
    pub enhancement: f64,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            f_laser_gvm: 2.7,
            f_dc_gvm: 0.2,
            tau_fs: 8.0,
            wavelength_nm: 800.0,
            phi_rad: std::f64::consts::PI,
            enhancement: 1.0,
        }
    }
}

impl OperatingPoint {
    /// Operating point whose incident pulse carries `fluence_jm2`; the at-tip field is
    /// the enhanced peak field of that pulse.
    pub fn from_fluence(fluence_jm2: f64, f_dc_gvm: f64, tau_fs: f64, enhancement: f64) -> Result<Self> {
        let bare = units::fluence_to_peak_field_gvm(fluence_jm2, tau_fs)?;
        Ok(Self { f_laser_gvm: bare * enhancement, f_dc_gvm, tau_fs, enhancement, ..Self::default() })
    }

    /// Incident fluence (before enhancement).
    pub fn fluence_jm2(&self) -> Result<f64> {
        units::peak_field_to_fluence_jm2(self.f_laser_gvm / self.enhancement, self.tau_fs)
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phi_rad = phi;
        self
    }

    pub fn with_laser_field(mut self, f_laser_gvm: f64) -> Self {
        self.f_laser_gvm = f_laser_gvm;
        self
    }

    pub fn with_dc_field(mut self, f_dc_gvm: f64) -> Self {
        self.f_dc_gvm = f_dc_gvm;
        self
    }

    /// The incident pulse, centred at t = 0.
    pub fn pulse(&self) -> Result<LaserPulse> {
        if !(self.enhancement > 0.0) {
            return domain(format!("enhancement must be positive, got {}", self.enhancement));
        }
        LaserPulse::from_practical(
            self.f_laser_gvm / self.enhancement,
            self.tau_fs,
            self.wavelength_nm,
            self.phi_rad,
            0.0,
        )
    }

    pub fn field_configuration(&self) -> Result<FieldConfiguration> {
        if !(self.f_dc_gvm >= 0.0) {
            return domain(format!("static field must be non-negative, got {}", self.f_dc_gvm));
        }
        Ok(FieldConfiguration::single(self.pulse()?)
            .with_dc(units::gvm(self.f_dc_gvm))
            .with_enhancement(self.enhancement))
    }
}

/// Output of one propagation.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: FluxTrace,
    pub report: PropagationReport,
    pub yield_: f64,
    /// Absent when the trace has no positive flux.
    pub emission: Option<EmissionResult>,
    pub final_state: QuantumState,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub metal: MetalModel,
    pub grid: GridSpec,
    pub calibration: Calibration,
    pub ground: QuantumState,
    pub ground_energy: f64,
    pub settings: SolverSettings,
}

impl GridTemplate {
    /// 15 nm domain for parameter scans; yields agree with the 40 nm domain to ~2e-4.
    pub fn scan() -> Self {
        Self { z_max: units::nm(15.0), n_points: 4096, ..Self::default() }
    }
}

impl SolverSettings {
    /// Coarser step for parameter scans (yields within ~0.2% of the converged value).
    pub fn scan() -> Self {
        Self { dt: 0.4, ..Self::default() }
    }
}

impl Simulation {
    /// Calibrates the well width to E₁ = −Φ on a grid resolving it, then prepares the
    /// ground state.
    pub fn prepare(metal: &MetalModel, template: &GridTemplate, settings: SolverSettings) -> Result<Self> {
        Self::prepare_with_target(metal, template, -metal.work_function, settings)
    }

    pub fn prepare_with_target(
        metal: &MetalModel,
        template: &GridTemplate,
        target: f64,
        settings: SolverSettings,
    ) -> Result<Self> {
        let (calibration, template) = calibrate_resolved(metal, template, target)?;
        let metal = metal.with_well_width(calibration.well_width);
        Self::with_grid(metal, template.for_well(calibration.well_width), calibration, settings)
    }

    /// Uses the well width already stored in `metal` and a fixed grid, skipping calibration.
    pub fn uncalibrated(metal: MetalModel, grid: GridSpec, settings: SolverSettings) -> Result<Self> {
        let gs = ground_state(&metal, &grid)?;
        let calibration = Calibration {
            well_width: metal.well_width,
            energy: gs.energy,
            target: gs.energy,
            infinite_well_estimate: crate::potential::infinite_well_width(metal.v0, -metal.work_function),
            evaluations: 1,
        };
        Ok(Self { metal, grid, calibration, ground_energy: gs.energy, ground: gs.state, settings })
    }

    fn with_grid(
        metal: MetalModel,
        grid: GridSpec,
        calibration: Calibration,
        settings: SolverSettings,
    ) -> Result<Self> {
        let gs = ground_state(&metal, &grid)?;
        Ok(Self { metal, grid, calibration, ground_energy: gs.energy, ground: gs.state, settings })
    }

    /// Same setup with the detector moved to `z_d` (bohr).
    pub fn with_detector(&self, z_d: f64) -> Result<Self> {
        let mut s = self.clone();
        s.grid.detector = z_d;
        s.grid.validate(&s.metal)?;
        s.ground.grid = s.grid;
        Ok(s)
    }

    pub fn with_settings(&self, settings: SolverSettings) -> Self {
        let mut s = self.clone();
        s.settings = settings;
        s
    }

    /// Propagates the ground state through `cfg` over the default time span.
    pub fn run(&self, cfg: &FieldConfiguration) -> Result<RunOutput> {
        let span = self.settings.time_span(cfg);
        let mut initial = self.ground.clone();
        initial.t = span.0;
        let (final_state, trace, report) = propagate(&initial, &self.metal, cfg, span, &self.settings)?;
        let yield_ = integrate_yield(&trace)?;
        let emission = pulse_width(&trace).ok();
        Ok(RunOutput { trace, report, yield_, emission, final_state })
    }

    pub fn run_point(&self, op: &OperatingPoint) -> Result<RunOutput> {
        self.run(&op.field_configuration()?)
    }

    pub fn yield_of(&self, op: &OperatingPoint) -> Result<f64> {
        Ok(self.run_point(op)?.yield_)
    }
}
