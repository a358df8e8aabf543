//! Imaginary-time ground state and well-width calibration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, GridTemplate, QuantumState};
use crate::error::{Error, Result};
use crate::potential::{infinite_well_width, MetalModel};
use crate::tridiag::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryTimeSettings {
    /// Imaginary-time step (atomic units).
    pub dtau: f64,
    /// Stop when the energy changes by less than this per step (Hartree).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ImaginaryTimeSettings {
    fn default() -> Self {
        Self { dtau: 100.0, tolerance: 1e-12, max_iterations: 5_000 }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: QuantumState,
    pub energy: f64,
    pub iterations: usize,
    /// ‖Hψ - Eψ‖ with ψ normalized on the grid.
    pub residual: f64,
}

/// Zero-field potential sampled on the grid.
pub fn static_potential_on(metal: &MetalModel, grid: &GridSpec) -> Vec<f64> {
    grid.positions().into_iter().map(|z| metal.static_potential(z)).collect()
}

/// Lowest eigenstate of the metal model without fields.
pub fn ground_state(metal: &MetalModel, grid: &GridSpec) -> Result<GroundState> {
    grid.validate(metal)?;
    ground_state_with_potential(grid, &static_potential_on(metal, grid), &ImaginaryTimeSettings::default())
}

/// Imaginary-time relaxation under an arbitrary real potential with hard walls at both ends.
///
/// Each step is a backward-Euler step of ∂ψ/∂τ = -(H - V_min)ψ followed by renormalization.
/// The reference shift V_min keeps the step operator positive definite.
pub fn ground_state_with_potential(
    grid: &GridSpec,
    potential: &[f64],
    settings: &ImaginaryTimeSettings,
) -> Result<GroundState> {
    let n = grid.n_points;
    assert_eq!(potential.len(), n);
    let dz = grid.dz();
    let k = 0.5 / (dz * dz);
    let v_ref = potential[1..n - 1].iter().copied().fold(f64::INFINITY, f64::min);
    let inner = n - 2;
    let dtau = settings.dtau;
    let off = vec![-dtau * k; inner];
    let diag: Vec<f64> = potential[1..n - 1].iter().map(|&v| 1.0 + dtau * (2.0 * k + v - v_ref)).collect();

    // positive start vector: overlaps the nodeless ground state
    let z_lo = grid.z_min;
    let mut psi: Vec<f64> = (1..n - 1)
        .map(|i| {
            let z = grid.z(i);
            let s = (z - z_lo) / (grid.z_max - z_lo);
            s * (1.0 - s) * (-(z.max(0.0)) * 0.5).exp()
        })
        .collect();
    normalize_real(&mut psi, dz);

    let mut scratch = Vec::with_capacity(inner);
    let mut energy = rayleigh(&psi, potential, k);
    let mut delta = f64::INFINITY;
    for it in 1..=settings.max_iterations {
        solve_tridiagonal(&off, &diag, &off, &mut psi, &mut scratch);
        normalize_real(&mut psi, dz);
        let e = rayleigh(&psi, potential, k);
        delta = (e - energy).abs();
        energy = e;
        if delta < settings.tolerance && it > 2 {
            let residual = residual(&psi, potential, k, energy, dz);
            let mut full = Vec::with_capacity(n);
            full.push(Complex64::new(0.0, 0.0));
            full.extend(psi.iter().map(|&x| Complex64::new(x, 0.0)));
            full.push(Complex64::new(0.0, 0.0));
            return Ok(GroundState { state: QuantumState::new(*grid, full, 0.0)?, energy, iterations: it, residual });
        }
    }
    Err(Error::Convergence {
        iterations: settings.max_iterations,
        residual: residual(&psi, potential, k, energy, dz),
        delta,
    })
}

fn normalize_real(psi: &mut [f64], dz: f64) {
    let s = (psi.iter().map(|x| x * x).sum::<f64>() * dz).sqrt();
    // fix the global sign so the state is positive
    let sign = if psi.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for x in psi.iter_mut() {
        *x *= sign / s;
    }
}

/// `psi` holds interior nodes only; `potential` the full grid.
fn apply_h(psi: &[f64], potential: &[f64], k: f64, i: usize) -> f64 {
    let left = if i > 0 { psi[i - 1] } else { 0.0 };
    let right = if i + 1 < psi.len() { psi[i + 1] } else { 0.0 };
    (2.0 * k + potential[i + 1]) * psi[i] - k * (left + right)
}

fn rayleigh(psi: &[f64], potential: &[f64], k: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..psi.len() {
        num += psi[i] * apply_h(psi, potential, k, i);
        den += psi[i] * psi[i];
    }
    num / den
}

fn residual(psi: &[f64], potential: &[f64], k: f64, e: f64, dz: f64) -> f64 {
    let s: f64 = (0..psi.len()).map(|i| (apply_h(psi, potential, k, i) - e * psi[i]).powi(2)).sum();
    (s * dz).sqrt()
}

/// Result of fitting the well width to the Fermi level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub well_width: f64,
    pub energy: f64,
    pub target: f64,
    /// πħ/√(2m(E_target - V₀)): the infinite-well starting estimate.
    pub infinite_well_estimate: f64,
    pub evaluations: usize,
}

/// Chooses L so that the ground-state energy equals `-work_function`.
pub fn calibrate_well_width(metal: &MetalModel, template: &GridTemplate) -> Result<Calibration> {
    calibrate_well_width_to(metal, template, -metal.work_function)
}

/// Same as [`calibrate_well_width`] with an explicit target energy.
pub fn calibrate_well_width_to(metal: &MetalModel, template: &GridTemplate, target: f64) -> Result<Calibration> {
    if !(metal.v0 < target && target < 0.0) {
        return Err(Error::Calibration(format!(
            "target {target} Ha must lie between V0 = {} Ha and the vacuum level",
            metal.v0
        )));
    }
    let estimate = infinite_well_width(metal.v0, target);
    let mut evaluations = 0;
    let mut energy_at = |l: f64| -> Result<f64> {
        evaluations += 1;
        let m = metal.with_well_width(l);
        Ok(ground_state(&m, &template.for_well(l))?.energy - target)
    };

    // E₁(L) decreases with L. The model potential lies below an infinite wall at z = 0,
    // so the infinite-well width is an upper bracket up to discretization error.
    let mut hi = estimate;
    let mut f_hi = energy_at(hi)?;
    let mut grow = 0;
    while f_hi > 0.0 {
        hi *= 1.5;
        f_hi = energy_at(hi)?;
        grow += 1;
        if grow > 20 {
            return Err(Error::Calibration("no well width brings the level below target".into()));
        }
    }
    let mut lo = hi * 0.5;
    let mut f_lo = energy_at(lo)?;
    let mut shrink = 0;
    while f_lo < 0.0 {
        lo *= 0.5;
        f_lo = energy_at(lo)?;
        shrink += 1;
        if shrink > 30 || lo < 1e-6 {
            return Err(Error::Calibration("no well width lifts the level above target".into()));
        }
    }

    // Illinois regula falsi on the bracket [lo, hi]
    let mut side = 0i8;
    let mut l = hi;
    let mut f = f_hi;
    for _ in 0..200 {
        l = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        f = energy_at(l)?;
        if f.abs() < 1e-11 || (hi - lo).abs() < 1e-13 * hi {
            break;
        }
        if f > 0.0 {
            lo = l;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = l;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(Calibration { well_width: l, energy: f + target, target, infinite_well_estimate: estimate, evaluations })
}

/// Calibrates L and grows the grid until dz ≤ L/[`super::POINTS_PER_WELL`], recalibrating on
/// the refined grid. Returns the calibration and the template it was obtained on.
pub fn calibrate_resolved(
    metal: &MetalModel,
    template: &GridTemplate,
    target: f64,
) -> Result<(Calibration, GridTemplate)> {
    let mut template = *template;
    for _ in 0..4 {
        let cal = calibrate_well_width_to(metal, &template, target)?;
        let refined = template.resolved_for(cal.well_width);
        if refined.n_points == template.n_points {
            return Ok((cal, template));
        }
        template = refined;
    }
    Err(Error::Calibration("grid refinement did not settle".into()))
}
