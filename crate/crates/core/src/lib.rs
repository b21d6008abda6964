//! Simulation engine for the atomic-beam continuous superradiant laser.
//!
//! A beam of excited two-level atoms crosses the mode of a bad cavity
//! (`κ` much faster than every atomic rate) and emits collectively into it.
//! This crate integrates the collective-spin mean-field equations (pulsed,
//! continuously loaded, with and without spontaneous emission, with and
//! without adiabatic elimination of the cavity field), the full second-order
//! cumulant system for one- and two-body moments, and a stochastic
//! trajectory model of discrete atom transits. On top of those sit the
//! emitted-spectrum / linewidth machinery and the closed-form steady-state
//! and threshold expressions used to cross-validate everything.
//!
//! Rates are stored internally as angular frequencies (rad/s). Every
//! human-facing interface (config files, CSV, CLI) uses ν = ω/2π in Hz.

pub mod analytics;
pub mod cumulant;
pub mod integrator;
pub mod meanfield;
pub mod montecarlo;
pub mod params;
pub mod spectrum;

pub use num_complex::Complex64 as C64;
