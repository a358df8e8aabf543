//! Parameter sweeps driven by a [`Config`], and their tabular output.
//!
//! Each sweep point produces named scalar outputs. Tables are written in long format,
//! one `(point, quantity)` per row, ordered by point index and then quantity name, so two
//! runs of the same configuration produce byte-identical CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::autocorr::{default_delays, iac_trace_surrogate, iac_trace_tdse};
use crate::config::{Config, IacMode, Task};
use crate::emission::{ce_modulation_scan, predict_peak_to_baseline};
use crate::error::{Error, Result};
use crate::field::LaserPulse;
use crate::fn_analytic::peak_to_baseline;
use crate::parallel::map_indexed;
use crate::simulation::{OperatingPoint, Simulation};
use crate::units;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Multi-index into the sweep axes.
    pub index: Vec<usize>,
    /// Axis values at this point.
    pub params: BTreeMap<String, f64>,
    /// Fully resolved operating point, when the axis values produced a valid one.
    pub resolved: Option<OperatingPoint>,
    pub outputs: BTreeMap<String, f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Completion status of one point as listed in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStatus {
    pub point: String,
    pub completed: bool,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_sha256: String,
    pub task: Task,
    pub axes: Vec<String>,
    pub points: usize,
    pub failed: usize,
    pub wall_time_s: f64,
    /// Well width the run was calibrated to (bohr), when a simulation was prepared.
    pub well_width_bohr: Option<f64>,
    pub grid_points: Option<usize>,
    pub status: Vec<PointStatus>,
    pub files: Vec<String>,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub manifest: Manifest,
}

impl SweepResult {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }
}

/// Whether `task` needs a calibrated simulation under `cfg`.
pub fn needs_simulation(cfg: &Config) -> bool {
    match cfg.sweep.task {
        Task::FnFit => false,
        Task::Iac => cfg.iac.mode == IacMode::Tdse,
        _ => true,
    }
}

/// Builds the calibrated simulation described by `cfg`.
pub fn prepare_simulation(cfg: &Config) -> Result<Simulation> {
    let metal = cfg.metal_model()?;
    Simulation::prepare_with_target(&metal, &cfg.grid_template(), cfg.target_energy(), cfg.solver_settings())
}

/// The pulse the detector or the propagation sees: peak field at the tip.
pub fn tip_pulse(op: &OperatingPoint) -> Result<LaserPulse> {
    LaserPulse::from_practical(op.f_laser_gvm, op.tau_fs, op.wavelength_nm, op.phi_rad, 0.0)
}

/// Outputs of `cfg.sweep.task` at one operating point.
pub fn evaluate_point(cfg: &Config, sim: Option<&Simulation>, op: &OperatingPoint) -> Result<BTreeMap<String, f64>> {
    let need = || sim.ok_or_else(|| Error::Config("task needs a prepared simulation".into()));
    let mut out = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        out.insert(k.to_string(), v);
    };
    match cfg.sweep.task {
        Task::Yield => {
            let run = need()?.run_point(op)?;
            put("yield", run.yield_);
            put("norm_loss", run.report.initial_norm - run.report.final_norm);
            if let Some(e) = run.emission {
                put("pulse_fwhm_fs", units::to_fs(e.pulse_fwhm));
                put("peak_time_fs", units::to_fs(e.peak_time));
                put("dominant_fraction", e.sub_pulse_fractions[e.dominant]);
                put("sub_pulses", e.sub_pulse_fractions.len() as f64);
            }
        }
        Task::ModulationScan => {
            let scan = ce_modulation_scan(need()?, op, cfg.sweep.n_phases)?;
            put("depth", scan.depth);
            put("best_phase_rad", scan.best_phase());
            put("yield_mean", scan.yields.iter().sum::<f64>() / scan.yields.len() as f64);
        }
        Task::Iac => {
            let pulse = tip_pulse(op)?;
            let f_dc = units::gvm(op.f_dc_gvm);
            let delays = default_delays(&pulse, units::fs(cfg.iac.max_delay_fs));
            let trace = match cfg.iac.mode {
                IacMode::Surrogate => iac_trace_surrogate(&pulse, f_dc, &cfg.detector()?, &delays)?,
                IacMode::Tdse => iac_trace_tdse(need()?, &pulse, f_dc, &delays)?,
            };
            put("peak_to_baseline", trace.peak_to_baseline);
            put("fringe_averaged_peak_to_baseline", trace.fringe_averaged_peak_to_baseline);
            put("baseline", trace.baseline);
            put("baseline_spread", trace.baseline_spread);
        }
        Task::FnFit => {
            let p = cfg.fn_params()?;
            let f_dc = units::gvm(op.f_dc_gvm);
            put("ratio_predicted", peak_to_baseline(&p, units::gvm(op.f_laser_gvm), f_dc)?);
        }
        Task::PeakToBaseline => {
            let r = predict_peak_to_baseline(need()?, op)?;
            put("exponent", r.exponent);
            put("from_exponent", r.from_exponent);
            put("direct", r.direct);
            put("yield_single", r.yield_single);
            put("yield_doubled", r.yield_doubled);
        }
    }
    Ok(out)
}

/// Runs every point of the sweep. A failing point is recorded, not fatal; only errors
/// that make the whole sweep meaningless (configuration, calibration) are returned.
pub fn run_sweep(cfg: &Config) -> Result<SweepResult> {
    cfg.validate()?;
    let start = Instant::now();
    let sim = if needs_simulation(cfg) { Some(prepare_simulation(cfg)?) } else { None };
    let points = cfg.sweep_points();
    let names: Vec<String> = cfg.sweep.axes.iter().map(|a| a.name.clone()).collect();
    let records = map_indexed(&points, |_, (index, values)| {
        let t0 = Instant::now();
        let params = names.iter().cloned().zip(values.iter().copied()).collect();
        let resolved = cfg.operating_point_at(values);
        let result = resolved.clone().and_then(|op| evaluate_point(cfg, sim.as_ref(), &op));
        let (outputs, error) = match result {
            Ok(o) => (o, None),
            Err(e) => (BTreeMap::new(), Some(e.to_string())),
        };
        RunRecord {
            index: index.clone(),
            params,
            resolved: resolved.ok(),
            outputs,
            error,
            wall_time_s: t0.elapsed().as_secs_f64(),
        }
    });
    let status: Vec<PointStatus> = records
        .iter()
        .map(|r| PointStatus {
            point: point_label(&r.index),
            completed: !r.failed(),
            error: r.error.clone(),
            wall_time_s: r.wall_time_s,
        })
        .collect();
    let manifest = Manifest {
        version: VERSION.to_string(),
        config_sha256: cfg.content_hash(),
        task: cfg.sweep.task,
        axes: names,
        points: records.len(),
        failed: status.iter().filter(|s| !s.completed).count(),
        wall_time_s: start.elapsed().as_secs_f64(),
        well_width_bohr: sim.as_ref().map(|s| s.metal.well_width),
        grid_points: sim.as_ref().map(|s| s.grid.n_points),
        status,
        files: Vec::new(),
        config: cfg.clone(),
    };
    Ok(SweepResult { records, manifest })
}

/// Axis indices joined by `:`; empty for a sweep without axes.
pub fn point_label(index: &[usize]) -> String {
    index.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(":")
}

/// Unit of each output quantity, for the table header.
fn quantity_unit(q: &str) -> &'static str {
    match q {
        "pulse_fwhm_fs" | "peak_time_fs" => "fs",
        "best_phase_rad" => "rad",
        "yield" | "yield_mean" | "yield_single" | "yield_doubled" | "norm_loss" | "baseline" => "probability",
        "sub_pulses" => "count",
        _ => "1",
    }
}

fn axis_unit(a: &str) -> &'static str {
    match a {
        "f_dc_GVm" | "f_laser_GVm" => "GV/m",
        "fluence_Jm2" => "J/m^2",
        "tau_fs" => "fs",
        "phi_rad" => "rad",
        "wavelength_nm" => "nm",
        _ => "?",
    }
}

fn task_name(task: Task) -> &'static str {
    match task {
        Task::Yield => "yield",
        Task::ModulationScan => "modulation_scan",
        Task::Iac => "iac",
        Task::FnFit => "fn_fit",
        Task::PeakToBaseline => "peak_to_baseline",
    }
}

/// Long-format CSV of `records`: `point,<axes...>,quantity,value`. `#` comment lines
/// before the header row carry the version with the configuration hash, then the units.
pub fn table_csv(result: &SweepResult) -> String {
    let m = &result.manifest;
    let mut out = format!("# tipemit {} task {} config sha256 {}\n", m.version, task_name(m.task), m.config_sha256);
    out.push_str("# point: axis indices joined by ':'");
    for a in &m.axes {
        out.push_str(&format!("; {a} [{}]", axis_unit(a)));
    }
    out.push('\n');
    let mut quantities: Vec<&String> = result.records.iter().flat_map(|r| r.outputs.keys()).collect();
    quantities.sort();
    quantities.dedup();
    if !quantities.is_empty() {
        let listed: Vec<String> = quantities.iter().map(|q| format!("{q} [{}]", quantity_unit(q))).collect();
        out.push_str(&format!("# quantity units: {}\n", listed.join("; ")));
    }
    out.push_str("point,");
    for a in &m.axes {
        out.push_str(a);
        out.push(',');
    }
    out.push_str("quantity,value\n");
    let mut rows: Vec<&RunRecord> = result.records.iter().filter(|r| !r.failed()).collect();
    rows.sort_by(|a, b| a.index.cmp(&b.index));
    for r in rows {
        let point = point_label(&r.index);
        let axis_values: String = m.axes.iter().map(|a| format!("{},", r.params[a])).collect();
        for (q, v) in &r.outputs {
            out.push_str(&format!("{point},{axis_values}{q},{v}\n"));
        }
    }
    out
}

/// Writes `<task>.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn emit_tables(result: &mut SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", task_name(result.manifest.task)));
    fs::write(&csv_path, table_csv(result)).map_err(|e| Error::io(&csv_path, e))?;
    let manifest_path = dir.join("manifest.json");
    result.manifest.files = vec![file_name(&csv_path), file_name(&manifest_path)];
    write_json(&manifest_path, &result.manifest)?;
    Ok(vec![csv_path, manifest_path])
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Pretty-printed JSON file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Parses a table written by [`table_csv`] back into `(point, quantity) -> value`.
pub fn read_table(text: &str) -> Result<BTreeMap<(String, String), f64>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Config(e.to_string()))?.clone();
    let n = headers.len();
    if n < 3 || &headers[0] != "point" || &headers[n - 2] != "quantity" || &headers[n - 1] != "value" {
        return Err(Error::Config("not a sweep table".into()));
    }
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Config(e.to_string()))?;
        let v: f64 = row[n - 1].parse().map_err(|_| Error::Config(format!("bad value `{}`", &row[n - 1])))?;
        out.insert((row[0].to_string(), row[n - 2].to_string()), v);
    }
    Ok(out)
}
