//! Named parameter sets reproducing the oscillator and slow-flow figures.
//!
//! `fig1a`..`fig1d` drive the oscillator with `eps = 1e-3`, `alpha = 5e-5`,
//! `gamma = 1/6`: the first pair without parametric pumping (`f0 = 4`), the
//! second with it (`f0 = 1`, `h0 = 5`). Panels a and d start anti-phase, b and
//! c in phase. Runs begin at slow time 1 on the leading-order captured state
//! `(sqrt(lambda tau0), psi0)`.
//!
//! `fig2a`..`fig2c` integrate the slow flow with `lambda = f = 1`, `m = 4`
//! from three initial states over `tau` in `[0, 50]`.

use std::f64::consts::PI;

use autores_core::model::{OscillatorParams, ReducedParams};
use serde::{Deserialize, Serialize};

use crate::args::PresetName;
use crate::error::{CliError, CliResult};

pub const FIG1_EPS: f64 = 1e-3;
pub const FIG1_ALPHA: f64 = 1e-4 / 2.0;
pub const FIG1_TAU0: f64 = 1.0;
pub const FIG1_TAU_END: f64 = 60.0;
pub const FIG1_DT: f64 = 0.25;
pub const FIG1_GUARD: f64 = 0.9;
pub const FIG2_HORIZON: f64 = 50.0;
pub const FIG2_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    InPhase,
    AntiPhase,
}

impl Mode {
    pub fn target(self) -> f64 {
        match self {
            Mode::InPhase => 0.0,
            Mode::AntiPhase => PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetSpec {
    Slow {
        params: ReducedParams,
        y0: [f64; 2],
        horizon: f64,
        dt: f64,
    },
    Oscillator {
        params: OscillatorParams,
        mode: Mode,
        tau0: f64,
        tau_end: f64,
        dt: f64,
        guard: f64,
    },
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig1a => "fig1a",
            PresetName::Fig1b => "fig1b",
            PresetName::Fig1c => "fig1c",
            PresetName::Fig1d => "fig1d",
            PresetName::Fig2a => "fig2a",
            PresetName::Fig2b => "fig2b",
            PresetName::Fig2c => "fig2c",
        }
    }

    pub fn all() -> [PresetName; 7] {
        use PresetName::*;
        [Fig1a, Fig1b, Fig1c, Fig1d, Fig2a, Fig2b, Fig2c]
    }
}

/// Chirp rate at `eps` that keeps `lambda` equal to its value at the figure's `eps`.
pub fn scaled_alpha(eps: f64) -> f64 {
    FIG1_ALPHA * (eps / FIG1_EPS).powf(4.0 / 3.0)
}

pub fn resolve(name: PresetName, eps: Option<f64>, tau_end: Option<f64>, dt: Option<f64>) -> CliResult<PresetSpec> {
    use PresetName::*;
    let slow_y0 = match name {
        Fig2a => Some([0.27, 0.01]),
        Fig2b => Some([0.32, 0.31]),
        Fig2c => Some([2.04, 1.78]),
        _ => None,
    };
    if let Some(y0) = slow_y0 {
        if eps.is_some() || tau_end.is_some() {
            return Err(CliError::BadInput(format!("{} is a slow-flow preset; --eps and --tau-end do not apply", name.as_str())));
        }
        return Ok(PresetSpec::Slow {
            params: ReducedParams::new(1.0, 1.0, 4.0)?,
            y0,
            horizon: FIG2_HORIZON,
            dt: dt.unwrap_or(FIG2_DT),
        });
    }
    let (f0, h0, mode) = match name {
        Fig1a => (4.0, 0.0, Mode::AntiPhase),
        Fig1b => (4.0, 0.0, Mode::InPhase),
        Fig1c => (1.0, 5.0, Mode::InPhase),
        _ => (1.0, 5.0, Mode::AntiPhase),
    };
    let eps = eps.unwrap_or(FIG1_EPS);
    Ok(PresetSpec::Oscillator {
        params: OscillatorParams::new(eps, scaled_alpha(eps), 1.0 / 6.0, f0, h0)?,
        mode,
        tau0: FIG1_TAU0,
        tau_end: tau_end.unwrap_or(FIG1_TAU_END),
        dt: dt.unwrap_or(FIG1_DT),
        guard: FIG1_GUARD,
    })
}
