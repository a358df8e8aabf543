//! Grid, ground state, real-time propagation and flux detection.

mod grid;
mod ground;
mod propagate;

pub use grid::{GridSpec, GridTemplate, QuantumState, POINTS_PER_WELL};
pub use ground::{
    calibrate_resolved, calibrate_well_width, calibrate_well_width_to, ground_state, ground_state_with_potential,
    static_potential_on, Calibration, GroundState, ImaginaryTimeSettings,
};
pub use propagate::{
    driving_field, probability_flux, propagate, FluxTrace, PropagationReport, SolverSettings, TraceMetadata,
};
