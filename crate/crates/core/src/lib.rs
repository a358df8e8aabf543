//! Optical field emission from a sharp metal tip.
//!
//! A one-dimensional time-dependent Schrödinger solver for a flat-bottom well with an
//! image-potential barrier driven by few-cycle pulses, the analytic Fowler-Nordheim
//! two-pulse model with its fit, interferometric autocorrelation synthesis, and
//! carrier-envelope-phase modulation scans.

pub mod autocorr;
pub mod config;
pub mod emission;
pub mod error;
pub mod field;
pub mod fn_analytic;
pub mod parallel;
pub mod potential;
pub mod qdynamics;
pub mod simulation;
pub mod sweep;
pub mod tridiag;
pub mod units;

pub use error::{Error, Result};
