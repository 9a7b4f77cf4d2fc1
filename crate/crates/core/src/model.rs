//! Slow-flow amplitude/phase models and the chirped, parametrically pumped
//! oscillator they are averaged from.
//!
//! The reduced system in slow time `tau` reads
//!
//! ```text
//! d(rho)/d(tau) = f sin(psi) - nu(tau) rho sin(2 psi)
//! d(psi)/d(tau) = rho^2 - lambda tau + (f / rho) cos(psi) - nu(tau) cos(2 psi)
//! ```
//!
//! with `nu(tau) = m / sqrt(1 + tau)`. Dropping the `nu` terms gives the model
//! with external pumping only.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Default amplitude floor below which the slow flow is considered singular.
pub const RHO_MIN: f64 = 1e-8;

/// Parameters `(lambda, f, m)` of the slow-flow models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// Detuning sweep rate.
    pub lambda: f64,
    /// External pumping amplitude.
    pub f: f64,
    /// Parametric pumping scale; `m = 0` switches the parametric drive off.
    pub m: f64,
}

impl ReducedParams {
    pub fn new(lambda: f64, f: f64, m: f64) -> Result<Self> {
        let params = ReducedParams { lambda, f, m };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ModelError::invalid("lambda", self.lambda, "must be positive"));
        }
        if !(self.f > 0.0 && self.f.is_finite()) {
            return Err(ModelError::invalid("f", self.f, "must be positive"));
        }
        if !self.m.is_finite() {
            return Err(ModelError::invalid("m", self.m, "must be finite"));
        }
        Ok(())
    }

    /// Critical parametric amplitude `m_* = f / sqrt(4 lambda)`.
    pub fn m_star(&self) -> f64 {
        self.f / (4.0 * self.lambda).sqrt()
    }

    /// `m / m_*`, the single ratio controlling which branches exist and are stable.
    pub fn pumping_ratio(&self) -> f64 {
        self.m / self.m_star()
    }
}

/// A point `(rho, psi, tau)` of the slow flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub rho: f64,
    pub psi: f64,
    pub tau: f64,
}

impl ReducedState {
    pub fn new(rho: f64, psi: f64, tau: f64) -> Self {
        ReducedState { rho, psi, tau }
    }
}

/// Parameters of the driven oscillator
/// `u'' + (1 + eps^(2/3) h(t) cos 2 phi(t)) U'(u) = eps f0 cos phi(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub eps: f64,
    /// Chirp rate in `phi(t) = t - alpha t^2`.
    pub alpha: f64,
    /// Quartic softening of `U(u) = u^2/2 - gamma u^4/4`.
    pub gamma: f64,
    pub f0: f64,
    pub h0: f64,
}

impl OscillatorParams {
    pub fn new(eps: f64, alpha: f64, gamma: f64, f0: f64, h0: f64) -> Result<Self> {
        let params = OscillatorParams {
            eps,
            alpha,
            gamma,
            f0,
            h0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(ModelError::invalid("eps", self.eps, "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ModelError::invalid("gamma", self.gamma, "must be positive"));
        }
        for (name, value) in [("alpha", self.alpha), ("f0", self.f0), ("h0", self.h0)] {
            if !value.is_finite() {
                return Err(ModelError::invalid(name, value, "must be finite"));
            }
        }
        Ok(())
    }

    /// Drive phase `phi(t) = t - alpha t^2`.
    pub fn drive_phase(&self, t: f64) -> f64 {
        t - self.alpha * t * t
    }

    /// Decaying parametric amplitude `h(t) = h0 / sqrt(1 + eps^(2/3) t)`.
    pub fn parametric_amplitude(&self, t: f64) -> f64 {
        self.h0 / (1.0 + self.slow_scale() * t).sqrt()
    }

    /// `eps^(2/3)`, the ratio between slow and fast time.
    pub fn slow_scale(&self) -> f64 {
        self.eps.powf(2.0 / 3.0)
    }

    /// Factor `eps^(1/3) sqrt(8 / (3 gamma))` mapping the slow amplitude `rho`
    /// to the oscillation amplitude of `u`.
    pub fn amplitude_factor(&self) -> f64 {
        self.eps.cbrt() * (8.0 / (3.0 * self.gamma)).sqrt()
    }

    pub fn potential(&self, u: f64) -> f64 {
        let u2 = u * u;
        0.5 * u2 - 0.25 * self.gamma * u2 * u2
    }

    pub fn restoring_force(&self, u: f64) -> f64 {
        u - self.gamma * u * u * u
    }

    /// State `(u, u')` at fast time `t` whose averaged amplitude and phase are `(rho, psi)`.
    pub fn state_from_slow(&self, rho: f64, psi: f64, t: f64) -> OscillatorState {
        let a = self.amplitude_factor() * rho;
        let theta = psi - self.drive_phase(t);
        OscillatorState {
            u: a * theta.cos(),
            v: a * theta.sin(),
            t,
        }
    }
}

/// Displacement, velocity and fast time of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorState {
    pub u: f64,
    pub v: f64,
    pub t: f64,
}

impl OscillatorState {
    pub fn new(u: f64, v: f64, t: f64) -> Self {
        OscillatorState { u, v, t }
    }
}

/// Parametric pumping profile `nu(tau) = m / sqrt(1 + tau)`.
pub fn nu(tau: f64, m: f64) -> f64 {
    m / (1.0 + tau).sqrt()
}

/// Right-hand side of the slow flow with the default amplitude floor.
pub fn reduced_rhs(
    state: &ReducedState,
    params: &ReducedParams,
    parametric: bool,
) -> Result<(f64, f64)> {
    reduced_rhs_with_floor(state, params, parametric, RHO_MIN)
}

pub fn reduced_rhs_with_floor(
    state: &ReducedState,
    params: &ReducedParams,
    parametric: bool,
    rho_min: f64,
) -> Result<(f64, f64)> {
    let ReducedState { rho, psi, tau } = *state;
    if !(rho > rho_min) {
        return Err(ModelError::AmplitudeSingular {
            rho,
            floor: rho_min,
        });
    }
    let (sin_psi, cos_psi) = psi.sin_cos();
    let mut drho = params.f * sin_psi;
    let mut dpsi = rho * rho - params.lambda * tau + params.f * cos_psi / rho;
    if parametric {
        let pump = nu(tau, params.m);
        let (sin2, cos2) = (2.0 * psi).sin_cos();
        drho -= pump * rho * sin2;
        dpsi -= pump * cos2;
    }
    Ok((drho, dpsi))
}

/// Right-hand side `(du/dt, dv/dt)` of the oscillator.
pub fn oscillator_rhs(state: &OscillatorState, params: &OscillatorParams) -> (f64, f64) {
    let OscillatorState { u, v, t } = *state;
    let phi = params.drive_phase(t);
    let modulation = 1.0 + params.slow_scale() * params.parametric_amplitude(t) * (2.0 * phi).cos();
    let dv = -modulation * params.restoring_force(u) + params.eps * params.f0 * phi.cos();
    (v, dv)
}

/// Energy `U(u) + u'^2 / 2` with the quartic potential.
pub fn energy(state: &OscillatorState, params: &OscillatorParams) -> f64 {
    params.potential(state.u) + 0.5 * state.v * state.v
}

/// Phase mismatch `phi(t) - Phi(t)` between drive and oscillator, wrapped to `(-pi, pi]`.
///
/// `Phi` is the quadrant-resolved angle `atan2(-u', u)`, so an oscillation
/// `u = a cos(psi - phi)` reports a mismatch of `psi`.
pub fn phase_mismatch(state: &OscillatorState, params: &OscillatorParams) -> Result<f64> {
    if state.u == 0.0 && state.v == 0.0 {
        return Err(ModelError::PhaseUndefined);
    }
    let own_phase = (-state.v).atan2(state.u);
    Ok(wrap_angle(params.drive_phase(state.t) - own_phase))
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Removes `2 pi` jumps between consecutive samples in place.
pub fn unwrap_phases(phases: &mut [f64]) {
    let mut offset = 0.0;
    let mut prev_raw = match phases.first() {
        Some(&p) => p,
        None => return,
    };
    for p in phases.iter_mut().skip(1) {
        let raw = *p;
        let jump = raw - prev_raw;
        if jump > PI {
            offset -= 2.0 * PI * ((jump + PI) / (2.0 * PI)).floor();
        } else if jump < -PI {
            offset += 2.0 * PI * ((-jump + PI) / (2.0 * PI)).floor();
        }
        prev_raw = raw;
        *p = raw + offset;
    }
}

/// Slow-flow parameters obtained by averaging the oscillator:
/// `lambda = 2 alpha eps^(-4/3)`, `m = h0 / 4`, `f = f0 sqrt(3 gamma / 32)`.
pub fn reduce_params(params: &OscillatorParams) -> Result<ReducedParams> {
    params.validate()?;
    if !(params.alpha > 0.0) {
        return Err(ModelError::NonPositiveLambda {
            alpha: params.alpha,
        });
    }
    if !(params.f0 > 0.0) {
        return Err(ModelError::NonPositiveDrive { f0: params.f0 });
    }
    let lambda = 2.0 * params.alpha * params.eps.powf(-4.0 / 3.0);
    let f = params.f0 * (3.0 * params.gamma / 32.0).sqrt();
    let m = params.h0 / 4.0;
    ReducedParams::new(lambda, f, m)
}
