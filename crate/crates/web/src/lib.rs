//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every exported function returns a flat `Float64Array` of interleaved `(x, y)` pairs so
//! the page can plot it without further decoding. The `*_pairs` functions hold the logic
//! and are plain Rust, which keeps them testable off the browser.

use tipemit::autocorr::{default_delays, iac_trace_surrogate, Detector};
use tipemit::field::LaserPulse;
use tipemit::fn_analytic::{peak_to_baseline, FNParams};
use tipemit::potential::{barrier_maximum, MetalModel};
use tipemit::{units, Result};
use wasm_bindgen::prelude::*;

/// Well width the default metal calibrates to, in nm.
pub const CALIBRATED_WELL_NM: f64 = 0.080_767;

fn flatten(pairs: impl Iterator<Item = (f64, f64)>) -> Vec<f64> {
    pairs.flat_map(|(x, y)| [x, y]).collect()
}

/// `(z_nm, V_eV)` over `[-2L, z_max]` with a static field applied.
pub fn potential_pairs(v0_ev: f64, work_function_ev: f64, f_dc_gvm: f64, z_max_nm: f64, n: usize) -> Result<Vec<f64>> {
    let metal = MetalModel::from_practical(v0_ev, work_function_ev, CALIBRATED_WELL_NM)?;
    let f = units::gvm(f_dc_gvm);
    let (a, b) = (-2.0 * metal.well_width, units::nm(z_max_nm));
    let n = n.max(2);
    let pts = (0..n).map(|i| {
        let z = a + (b - a) * i as f64 / (n - 1) as f64;
        (units::to_nm(z), units::to_ev(metal.potential(z, f)))
    });
    Ok(flatten(pts))
}

/// `(z_nm, V_eV)` of the barrier top under `f_dc_gvm`.
pub fn barrier_top(v0_ev: f64, work_function_ev: f64, f_dc_gvm: f64) -> Result<Vec<f64>> {
    let metal = MetalModel::from_practical(v0_ev, work_function_ev, CALIBRATED_WELL_NM)?;
    let (z, v) = barrier_maximum(&metal, units::gvm(f_dc_gvm))?;
    Ok(vec![units::to_nm(z), units::to_ev(v)])
}

/// `(delay_fs, current / baseline)` of the FN surrogate trace.
pub fn iac_pairs(
    f_laser_gvm: f64,
    f_dc_gvm: f64,
    tau_fs: f64,
    phi_rad: f64,
    b_gvm: f64,
    max_delay_fs: f64,
) -> Result<Vec<f64>> {
    let pulse = LaserPulse::from_practical(f_laser_gvm, tau_fs, 800.0, phi_rad, 0.0)?;
    let det = Detector::FowlerNordheim(FNParams::effective_gvm(b_gvm)?);
    let delays = default_delays(&pulse, units::fs(max_delay_fs));
    let trace = iac_trace_surrogate(&pulse, units::gvm(f_dc_gvm), &det, &delays)?;
    let pts = trace.delays.iter().zip(&trace.currents).map(|(d, c)| (units::to_fs(*d), c / trace.baseline));
    Ok(flatten(pts))
}

/// `(f_dc_GVm, peak/baseline)` of the two-pulse FN model.
pub fn fn_ratio_pairs(f_laser_gvm: f64, b_gvm: f64, dc_min_gvm: f64, dc_max_gvm: f64, n: usize) -> Result<Vec<f64>> {
    let p = FNParams::effective_gvm(b_gvm)?;
    let n = n.max(2);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let d = dc_min_gvm + (dc_max_gvm - dc_min_gvm) * i as f64 / (n - 1) as f64;
        out.push(d);
        out.push(peak_to_baseline(&p, units::gvm(f_laser_gvm), units::gvm(d))?);
    }
    Ok(out)
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn potential_curve(
    v0_ev: f64,
    work_function_ev: f64,
    f_dc_gvm: f64,
    z_max_nm: f64,
    n: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(potential_pairs(v0_ev, work_function_ev, f_dc_gvm, z_max_nm, n))
}

#[wasm_bindgen]
pub fn barrier(v0_ev: f64, work_function_ev: f64, f_dc_gvm: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(barrier_top(v0_ev, work_function_ev, f_dc_gvm))
}

#[wasm_bindgen]
pub fn surrogate_iac(
    f_laser_gvm: f64,
    f_dc_gvm: f64,
    tau_fs: f64,
    phi_rad: f64,
    b_gvm: f64,
    max_delay_fs: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    js(iac_pairs(f_laser_gvm, f_dc_gvm, tau_fs, phi_rad, b_gvm, max_delay_fs))
}

#[wasm_bindgen]
pub fn fn_ratio_curve(
    f_laser_gvm: f64,
    b_gvm: f64,
    dc_min_gvm: f64,
    dc_max_gvm: f64,
    n: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(fn_ratio_pairs(f_laser_gvm, b_gvm, dc_min_gvm, dc_max_gvm, n))
}
