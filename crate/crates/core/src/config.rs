//! Run configuration: a TOML document with `metal`, `laser`, `grid`, `solver`, `fn`,
//! `iac`, `sweep` and `output` sections. Every physical key carries its unit in the name.
//!
//! ```toml
//! [laser]
//! f_laser_GVm = 2.7
//! f_dc_GVm = 0.2
//! tau_fs = 8.0
//!
//! [sweep]
//! task = "yield"
//! [[sweep.axes]]
//! name = "f_dc_GVm"
//! min = 0.2
//! max = 1.5
//! count = 6
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autocorr::Detector;
use crate::error::{Error, Result};
use crate::fn_analytic::{exponent_constant, FNParams};
use crate::potential::MetalModel;
use crate::qdynamics::{GridTemplate, SolverSettings};
use crate::simulation::OperatingPoint;
use crate::units;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetalSection {
    #[serde(rename = "v0_eV")]
    pub v0_ev: f64,
    #[serde(rename = "work_function_eV")]
    pub work_function_ev: f64,
    /// Ground-state energy the well width is calibrated to; defaults to −Φ.
    #[serde(rename = "target_energy_eV", default, skip_serializing_if = "Option::is_none")]
    pub target_energy_ev: Option<f64>,
}

impl Default for MetalSection {
    fn default() -> Self {
        Self { v0_ev: -13.5, work_function_ev: 4.5, target_energy_ev: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    /// Peak field at the tip. Ignored when `fluence_Jm2` is set.
    #[serde(rename = "f_laser_GVm")]
    pub f_laser_gvm: f64,
    /// Incident fluence; when present it sets the peak field.
    #[serde(rename = "fluence_Jm2", default, skip_serializing_if = "Option::is_none")]
    pub fluence_jm2: Option<f64>,
    #[serde(rename = "f_dc_GVm")]
    pub f_dc_gvm: f64,
    pub tau_fs: f64,
    pub wavelength_nm: f64,
    pub phi_rad: f64,
    pub enhancement: f64,
}

impl Default for LaserSection {
    fn default() -> Self {
        let op = OperatingPoint::default();
        Self {
            f_laser_gvm: op.f_laser_gvm,
            fluence_jm2: None,
            f_dc_gvm: op.f_dc_gvm,
            tau_fs: op.tau_fs,
            wavelength_nm: op.wavelength_nm,
            phi_rad: op.phi_rad,
            enhancement: op.enhancement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub z_max_nm: f64,
    /// Lower bound; the grid grows until dz ≤ L/64.
    pub n_points: usize,
    pub detector_nm: f64,
    pub absorber_nm: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self::from_template(&GridTemplate::default())
    }
}

impl GridSection {
    pub fn from_template(t: &GridTemplate) -> Self {
        Self {
            z_max_nm: units::to_nm(t.z_max),
            n_points: t.n_points,
            detector_nm: units::to_nm(t.detector),
            absorber_nm: units::to_nm(t.absorber_width),
        }
    }

    pub fn template(&self) -> GridTemplate {
        GridTemplate {
            z_max: units::nm(self.z_max_nm),
            n_points: self.n_points,
            detector: units::nm(self.detector_nm),
            absorber_width: units::nm(self.absorber_nm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt_au: f64,
    pub settle_fs: f64,
    pub dc_ramp_fs: f64,
    #[serde(rename = "absorber_strength_Ha")]
    pub absorber_strength_ha: f64,
    pub record_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self::from_settings(&SolverSettings::default())
    }
}

impl SolverSection {
    pub fn from_settings(s: &SolverSettings) -> Self {
        Self {
            dt_au: s.dt,
            settle_fs: units::to_fs(s.settle_time),
            dc_ramp_fs: units::to_fs(s.dc_ramp),
            absorber_strength_ha: s.absorber_strength,
            record_every: s.record_every,
        }
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            dt: self.dt_au,
            settle_time: units::fs(self.settle_fs),
            dc_ramp: units::fs(self.dc_ramp_fs),
            absorber_strength: self.absorber_strength_ha,
            record_every: self.record_every,
            ..SolverSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FnSection {
    pub a: f64,
    /// Exponent constant; derived from the work function when absent.
    #[serde(rename = "b_GVm", default, skip_serializing_if = "Option::is_none")]
    pub b_gvm: Option<f64>,
    pub schottky_correction: bool,
    pub fit_b: bool,
}

impl Default for FnSection {
    fn default() -> Self {
        Self { a: 1.0, b_gvm: None, schottky_correction: true, fit_b: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IacMode {
    Surrogate,
    Tdse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    FowlerNordheim,
    IntensityPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IacSection {
    pub mode: IacMode,
    pub detector: DetectorKind,
    /// Order of the intensity-power detector.
    pub order: u32,
    pub max_delay_fs: f64,
}

impl Default for IacSection {
    fn default() -> Self {
        Self { mode: IacMode::Surrogate, detector: DetectorKind::FowlerNordheim, order: 2, max_delay_fs: 100.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Single propagation: yield, pulse width, dominant-burst share.
    Yield,
    /// CE-phase scan: modulation depth.
    ModulationScan,
    /// Autocorrelation contrast.
    Iac,
    /// Analytic peak-to-baseline from the FN two-pulse model.
    FnFit,
    /// Peak-to-baseline predicted from simulated yields (exponent and direct routes).
    PeakToBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Axis names a sweep may vary.
pub const AXIS_NAMES: [&str; 6] = ["f_dc_GVm", "f_laser_GVm", "fluence_Jm2", "tau_fs", "phi_rad", "wavelength_nm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "linear")]
    pub spacing: Spacing,
}

fn linear() -> Spacing {
    Spacing::Linear
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * s,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * s).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub task: Task,
    #[serde(default)]
    pub axes: Vec<Axis>,
    pub n_phases: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { task: Task::Yield, axes: Vec::new(), n_phases: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub workers: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), workers: 1 }
    }
}

/// The whole configuration; every section is optional in the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub metal: MetalSection,
    pub laser: LaserSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    #[serde(rename = "fn")]
    pub fn_model: FnSection,
    pub iac: IacSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

macro_rules! require {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(Error::Config(format!($($msg)+)));
        }
    };
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Canonical JSON of the configuration hashed with SHA-256.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every constraint before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let m = &self.metal;
        require!(
            m.v0_ev < -m.work_function_ev && m.work_function_ev > 0.0,
            "metal: need v0_eV < -work_function_eV < 0"
        );
        if let Some(t) = m.target_energy_ev {
            require!(m.v0_ev < t && t < 0.0, "metal: target_energy_eV must lie between v0_eV and 0");
        }
        let l = &self.laser;
        require!(l.f_laser_gvm >= 0.0, "laser: f_laser_GVm must be non-negative");
        require!(l.f_dc_gvm >= 0.0, "laser: f_dc_GVm must be non-negative");
        require!(l.tau_fs > 0.0, "laser: tau_fs must be positive");
        require!(l.wavelength_nm > 0.0, "laser: wavelength_nm must be positive");
        require!(l.enhancement > 0.0, "laser: enhancement must be positive");
        require!(l.phi_rad.is_finite(), "laser: phi_rad must be finite");
        if let Some(f) = l.fluence_jm2 {
            require!(f >= 0.0, "laser: fluence_Jm2 must be non-negative");
        }
        let g = &self.grid;
        require!(g.n_points >= 8, "grid: n_points must be at least 8");
        require!(
            g.detector_nm > 0.0 && g.absorber_nm > 0.0 && g.detector_nm < g.z_max_nm - g.absorber_nm,
            "grid: need 0 < detector_nm < z_max_nm - absorber_nm"
        );
        let s = &self.solver;
        require!(s.dt_au > 0.0, "solver: dt_au must be positive");
        require!(s.settle_fs >= 0.0 && s.dc_ramp_fs >= 0.0, "solver: settle_fs and dc_ramp_fs must be non-negative");
        require!(s.absorber_strength_ha > 0.0, "solver: absorber_strength_Ha must be positive");
        require!(s.record_every >= 1, "solver: record_every must be at least 1");
        let f = &self.fn_model;
        require!(f.a > 0.0, "fn: a must be positive");
        if let Some(b) = f.b_gvm {
            require!(b >= 0.0, "fn: b_GVm must be non-negative");
        }
        let i = &self.iac;
        require!(i.order >= 1, "iac: order must be at least 1");
        require!(i.max_delay_fs > 5.0 * l.tau_fs, "iac: max_delay_fs must exceed 5 tau_fs for the baseline");
        let sw = &self.sweep;
        require!(sw.n_phases >= 8, "sweep: n_phases must be at least 8");
        let mut seen = Vec::new();
        for a in &sw.axes {
            require!(
                AXIS_NAMES.contains(&a.name.as_str()),
                "sweep: unknown axis `{}`; expected one of {:?}",
                a.name,
                AXIS_NAMES
            );
            require!(!seen.contains(&a.name), "sweep: axis `{}` listed twice", a.name);
            require!(a.count >= 1, "sweep: axis `{}` needs count >= 1", a.name);
            require!(a.min.is_finite() && a.max.is_finite(), "sweep: axis `{}` bounds must be finite", a.name);
            if a.spacing == Spacing::Log {
                require!(a.min > 0.0 && a.max > 0.0, "sweep: log axis `{}` needs positive bounds", a.name);
            }
            let positive = matches!(a.name.as_str(), "tau_fs" | "wavelength_nm");
            let nonneg = matches!(a.name.as_str(), "f_dc_GVm" | "f_laser_GVm" | "fluence_Jm2");
            if positive {
                require!(a.min > 0.0 && a.max > 0.0, "sweep: axis `{}` must be positive", a.name);
            }
            if nonneg {
                require!(a.min >= 0.0 && a.max >= 0.0, "sweep: axis `{}` must be non-negative", a.name);
            }
            seen.push(a.name.clone());
        }
        require!(
            !(seen.iter().any(|n| n == "f_laser_GVm") && seen.iter().any(|n| n == "fluence_Jm2")),
            "sweep: f_laser_GVm and fluence_Jm2 cannot both be axes"
        );
        require!(self.output.workers >= 1, "output: workers must be at least 1");
        Ok(())
    }

    pub fn metal_model(&self) -> Result<MetalModel> {
        let m = &self.metal;
        // well width is a placeholder until calibration
        MetalModel::from_practical(m.v0_ev, m.work_function_ev, 0.2)
    }

    pub fn target_energy(&self) -> f64 {
        units::ev(self.metal.target_energy_ev.unwrap_or(-self.metal.work_function_ev))
    }

    pub fn grid_template(&self) -> GridTemplate {
        self.grid.template()
    }

    pub fn solver_settings(&self) -> SolverSettings {
        self.solver.settings()
    }

    /// Operating point of the `laser` section.
    pub fn operating_point(&self) -> Result<OperatingPoint> {
        let l = &self.laser;
        let mut op = OperatingPoint {
            f_laser_gvm: l.f_laser_gvm,
            f_dc_gvm: l.f_dc_gvm,
            tau_fs: l.tau_fs,
            wavelength_nm: l.wavelength_nm,
            phi_rad: l.phi_rad,
            enhancement: l.enhancement,
        };
        if let Some(f) = l.fluence_jm2 {
            op.f_laser_gvm = units::fluence_to_peak_field_gvm(f, l.tau_fs)? * l.enhancement;
        }
        Ok(op)
    }

    pub fn fn_params(&self) -> Result<FNParams> {
        let f = &self.fn_model;
        let wf = units::ev(self.metal.work_function_ev);
        let b = f.b_gvm.map(units::gvm).unwrap_or_else(|| exponent_constant(wf));
        FNParams::new(f.a, b, f.schottky_correction, wf)
    }

    pub fn detector(&self) -> Result<Detector> {
        Ok(match self.iac.detector {
            DetectorKind::FowlerNordheim => Detector::FowlerNordheim(self.fn_params()?),
            DetectorKind::IntensityPower => Detector::IntensityPower(self.iac.order),
        })
    }

    /// Grid points of the sweep as axis values, in lexicographic index order (last axis fastest).
    pub fn sweep_points(&self) -> Vec<(Vec<usize>, Vec<f64>)> {
        let axes: Vec<Vec<f64>> = self.sweep.axes.iter().map(Axis::values).collect();
        let total: usize = axes.iter().map(Vec::len).product();
        (0..total)
            .map(|mut flat| {
                let mut idx = vec![0; axes.len()];
                for (k, a) in axes.iter().enumerate().rev() {
                    idx[k] = flat % a.len();
                    flat /= a.len();
                }
                let vals = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
                (idx, vals)
            })
            .collect()
    }

    /// Operating point with the axis values of one sweep point applied.
    pub fn operating_point_at(&self, values: &[f64]) -> Result<OperatingPoint> {
        let mut laser = self.laser.clone();
        for (axis, &v) in self.sweep.axes.iter().zip(values) {
            match axis.name.as_str() {
                "f_dc_GVm" => laser.f_dc_gvm = v,
                "f_laser_GVm" => {
                    laser.f_laser_gvm = v;
                    laser.fluence_jm2 = None;
                }
                "fluence_Jm2" => laser.fluence_jm2 = Some(v),
                "tau_fs" => laser.tau_fs = v,
                "phi_rad" => laser.phi_rad = v,
                "wavelength_nm" => laser.wavelength_nm = v,
                other => return Err(Error::Config(format!("unknown axis `{other}`"))),
            }
        }
        Config { laser, ..self.clone() }.operating_point()
    }
}
