//! Thin wrappers that integrate the models with the settings the commands share.

use autores_core::integrate::{integrate, IntegrateError, IntegratorConfig, Trajectory};
use autores_core::model::{
    oscillator_rhs, phase_mismatch, reduced_rhs, unwrap_phases, OscillatorParams, OscillatorState, ReducedParams,
    ReducedState,
};
use autores_core::ModelError;

pub fn config(tol: f64, dt: f64, max_step: f64) -> IntegratorConfig {
    IntegratorConfig {
        max_step,
        ..IntegratorConfig::default().with_tolerance(tol).with_sample_interval(dt)
    }
}

pub fn integrate_slow(
    params: &ReducedParams,
    parametric: bool,
    y0: [f64; 2],
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    let p = *params;
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), ModelError> {
        let (a, b) = reduced_rhs(&ReducedState::new(y[0], y[1], t), &p, parametric)?;
        dy[0] = a;
        dy[1] = b;
        Ok(())
    };
    integrate(&rhs, &y0, span, cfg, None)
}

/// Height of the potential barrier `U(1/sqrt(gamma)) = 1 / (4 gamma)`.
pub fn barrier_energy(params: &OscillatorParams) -> f64 {
    0.25 / params.gamma
}

/// Integrates the oscillator; with `guard_fraction` the run stops once the
/// energy exceeds that fraction of the barrier, before the well is left.
pub fn integrate_oscillator(
    params: &OscillatorParams,
    y0: [f64; 2],
    span: (f64, f64),
    cfg: &IntegratorConfig,
    guard_fraction: Option<f64>,
) -> Result<Trajectory, IntegrateError> {
    let p = *params;
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), ModelError> {
        let (a, b) = oscillator_rhs(&OscillatorState::new(y[0], y[1], t), &p);
        dy[0] = a;
        dy[1] = b;
        Ok(())
    };
    match guard_fraction {
        Some(frac) => {
            let limit = frac * barrier_energy(&p);
            let guard = move |_t: f64, y: &[f64]| 0.5 * y[1] * y[1] + p.potential(y[0]) > limit;
            integrate(&rhs, &y0, span, cfg, Some(&guard))
        }
        None => integrate(&rhs, &y0, span, cfg, None),
    }
}

/// Unwrapped phase mismatch along an oscillator trajectory, NaN where undefined.
pub fn phase_track(tr: &Trajectory, params: &OscillatorParams) -> Vec<f64> {
    let mut delta: Vec<f64> = tr
        .samples
        .iter()
        .map(|s| phase_mismatch(&OscillatorState::new(s.y[0], s.y[1], s.t), params).unwrap_or(f64::NAN))
        .collect();
    unwrap_phases(&mut delta);
    delta
}

/// Shifts an unwrapped phase track by the multiple of `2 pi` that puts its
/// first value closest to `anchor`.
pub fn anchor_phases(delta: &mut [f64], anchor: f64) {
    let Some(&first) = delta.first() else { return };
    let shift = std::f64::consts::TAU * ((anchor - first) / std::f64::consts::TAU).round();
    delta.iter_mut().for_each(|d| *d += shift);
}

pub fn reduced_rows(tr: &Trajectory) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    tr.samples.iter().map(|s| (s.t, s.y[0], s.y[1]))
}

/// Rows `(t, u, v, E, Delta)`; with `anchor`, Delta is shifted by whole turns to start near it.
pub fn oscillator_rows(tr: &Trajectory, params: &OscillatorParams, anchor: Option<f64>) -> Vec<(f64, f64, f64, f64, f64)> {
    let mut delta = phase_track(tr, params);
    if let Some(a) = anchor {
        anchor_phases(&mut delta, a);
    }
    tr.samples
        .iter()
        .zip(delta)
        .map(|(s, d)| {
            let e = 0.5 * s.y[1] * s.y[1] + params.potential(s.y[0]);
            (s.t, s.y[0], s.y[1], e, d)
        })
        .collect()
}

/// Piecewise-linear reading of component `i` of a trajectory sampled on a uniform grid.
pub fn interpolate(tr: &Trajectory, i: usize, t: f64) -> f64 {
    let s = &tr.samples;
    let k = s.partition_point(|x| x.t <= t).clamp(1, s.len() - 1);
    let (a, b) = (&s[k - 1], &s[k]);
    let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
    a.y[i] + w * (b.y[i] - a.y[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_lines() {
        let p = ReducedParams {
            lambda: 1.0,
            f: 0.0,
            m: 0.0,
        };
        // with f = m = 0, rho is constant and psi' = rho^2 - tau
        let tr = integrate_slow(&p, false, [1.0, 0.0], (0.0, 1.0), &config(1e-12, 0.1, 1.0)).unwrap();
        for t in [0.0, 0.05, 0.37, 1.0] {
            assert!((interpolate(&tr, 0, t) - 1.0).abs() < 1e-12);
        }
        let exact = 0.37 - 0.5 * 0.37 * 0.37;
        assert!((interpolate(&tr, 1, 0.37) - exact).abs() < 2e-3);
    }

    #[test]
    fn anchoring_shifts_whole_turns() {
        let mut d = vec![-3.1, -2.0, 7.0];
        anchor_phases(&mut d, std::f64::consts::PI);
        let tau = std::f64::consts::TAU;
        assert_eq!(d, vec![-3.1 + tau, -2.0 + tau, 7.0 + tau]);
    }

    #[test]
    fn guard_stops_below_the_barrier() {
        let p = OscillatorParams::new(0.02, 0.5 * 0.02f64.powf(4.0 / 3.0), 1.0 / 6.0, 4.0, 0.0).unwrap();
        let st = p.state_from_slow(1.0, std::f64::consts::PI, 1.0 / p.slow_scale());
        let cfg = config(1e-9, 0.05, 1.0);
        let tr = integrate_oscillator(&p, [st.u, st.v], (st.t, 40.0 / p.slow_scale()), &cfg, Some(0.9)).unwrap();
        let last = tr.last();
        let e = 0.5 * last.y[1] * last.y[1] + p.potential(last.y[0]);
        assert!(e > 0.9 * barrier_energy(&p) && e < barrier_energy(&p));
    }
}
