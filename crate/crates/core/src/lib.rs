//! Numerical laboratory for autoresonant capture under external and decaying
//! parametric pumping.
//!
//! - [`model`]: slow-flow and oscillator vector fields, parameter reduction.
//! - [`integrate`]: adaptive Dormand–Prince integrator with sampled output.
//! - [`series`] and [`asymptotics`]: power-series autoresonant solutions.
//! - [`stability`]: linearization, leading discriminants and branch classification.
//! - [`lyapunov`]: deviation coordinates, Lyapunov functions and sampled checks.

pub mod asymptotics;
pub mod error;
pub mod integrate;
pub mod lyapunov;
pub mod model;
pub mod series;
pub mod stability;

pub use error::{ModelError, Result};
