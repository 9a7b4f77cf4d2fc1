//! Adaptive Dormand–Prince 5(4) integrator with dense output on a fixed sample grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;

/// A vector field `dy/dt = F(t, y)` that may refuse to evaluate outside its domain.
pub trait VectorField {
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), ModelError>;
}

impl<F> VectorField for F
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), ModelError>,
{
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<(), ModelError> {
        self(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Spacing of the output grid in the independent variable.
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            initial_step: 1e-3,
            max_step: 1.0,
            sample_interval: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    pub fn with_sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = dt;
        self
    }

    pub fn validate(&self, span: (f64, f64)) -> Result<(), IntegrateError> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !in_unit(self.rel_tol) || !in_unit(self.abs_tol) {
            return Err(IntegrateError::InvalidConfig("tolerances must lie in (0, 1)"));
        }
        if !(self.initial_step > 0.0 && self.max_step > 0.0 && self.sample_interval > 0.0) {
            return Err(IntegrateError::InvalidConfig("steps and sample interval must be positive"));
        }
        if !(span.1 > span.0) || !span.0.is_finite() || !span.1.is_finite() {
            return Err(IntegrateError::InvalidConfig("span must satisfy t0 < t1"));
        }
        if self.sample_interval > span.1 - span.0 {
            return Err(IntegrateError::InvalidConfig("sample interval exceeds the span"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    EndOfSpan,
    Guard,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Values of one state component along the trajectory.
    pub fn component(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(move |s| s.y[i])
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("vector field failed at t = {t}: {source}")]
    Rhs { t: f64, source: ModelError },

    #[error("step size {step:e} underflowed at t = {t}")]
    StepUnderflow {
        t: f64,
        step: f64,
        trajectory: Box<Trajectory>,
    },
}

impl IntegrateError {
    /// Samples produced before the failure, when there are any.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            IntegrateError::StepUnderflow { trajectory, .. } => Some(trajectory),
            _ => None,
        }
    }
}

pub type Guard<'a> = &'a (dyn Fn(f64, &[f64]) -> bool + Sync);

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Nørsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const UNDERFLOW_FRACTION: f64 = 1e-14;

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    dense: [Vec<f64>; 5],
}

impl Stages {
    fn new(n: usize) -> Self {
        let v = || vec![0.0; n];
        Stages {
            k: [v(), v(), v(), v(), v(), v(), v()],
            tmp: v(),
            y_new: v(),
            dense: [v(), v(), v(), v(), v()],
        }
    }
}

/// Integrates `rhs` from `y0` over `span`, sampling on the grid
/// `t0 + k * sample_interval` (plus `t1` itself).
///
/// The guard is checked at every emitted sample; the first sample where it
/// holds is kept and integration stops with [`Termination::Guard`].
pub fn integrate<F: VectorField + ?Sized>(
    rhs: &F,
    y0: &[f64],
    span: (f64, f64),
    config: &IntegratorConfig,
    guard: Option<Guard<'_>>,
) -> Result<Trajectory, IntegrateError> {
    config.validate(span)?;
    let (t0, t1) = span;
    let n = y0.len();
    let h_min = UNDERFLOW_FRACTION * (t1 - t0);
    let dt = config.sample_interval;

    let mut st = Stages::new(n);
    let mut y = y0.to_vec();
    let mut t = t0;
    rhs.eval(t, &y, &mut st.k[0])
        .map_err(|source| IntegrateError::Rhs { t, source })?;

    let mut meta = TrajectoryMeta {
        accepted_steps: 0,
        rejected_steps: 0,
        terminated_by: Termination::EndOfSpan,
    };
    let mut samples = vec![Sample { t: t0, y: y.clone() }];
    if guard.is_some_and(|g| g(t0, &y)) {
        meta.terminated_by = Termination::Guard;
        return Ok(Trajectory { samples, meta });
    }
    let mut next_k: u64 = 1;
    let mut h = config.initial_step.min(config.max_step).min(t1 - t0);

    while t < t1 {
        if h < h_min {
            meta.terminated_by = Termination::StepUnderflow;
            return Err(IntegrateError::StepUnderflow {
                t,
                step: h,
                trajectory: Box::new(Trajectory { samples, meta }),
            });
        }
        let last_step = t + h >= t1;
        let step = if last_step { t1 - t } else { h };

        match attempt_step(rhs, t, step, &y, &mut st) {
            Ok(()) => {}
            Err(_) => {
                // a trial stage left the domain; retry with a smaller step
                meta.rejected_steps += 1;
                h = step * 0.25;
                continue;
            }
        }

        let err = error_norm(&st, &y, step, config);
        if err <= 1.0 {
            meta.accepted_steps += 1;
            build_dense(&mut st, &y, step);
            let t_next = if last_step { t1 } else { t + step };

            // emit grid samples inside (t, t_next]
            loop {
                let ts = t0 + next_k as f64 * dt;
                if ts > t_next || ts > t1 {
                    break;
                }
                let theta = (ts - t) / step;
                let ys = dense_eval(&st.dense, theta);
                let stop = guard.is_some_and(|g| g(ts, &ys));
                samples.push(Sample { t: ts, y: ys });
                next_k += 1;
                if stop {
                    meta.terminated_by = Termination::Guard;
                    return Ok(Trajectory { samples, meta });
                }
            }

            t = t_next;
            std::mem::swap(&mut y, &mut st.y_new);
            st.k.swap(0, 6);
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h = (step * factor).min(config.max_step);
        } else {
            meta.rejected_steps += 1;
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            h = step * factor;
        }
    }

    let last_t = samples.last().map(|s| s.t).unwrap_or(t0);
    if t1 - last_t > 1e-9 * dt {
        let stop = guard.is_some_and(|g| g(t1, &y));
        samples.push(Sample { t: t1, y: y.clone() });
        if stop {
            meta.terminated_by = Termination::Guard;
        }
    }
    Ok(Trajectory { samples, meta })
}

fn attempt_step<F: VectorField + ?Sized>(
    rhs: &F,
    t: f64,
    h: f64,
    y: &[f64],
    st: &mut Stages,
) -> Result<(), ModelError> {
    let n = y.len();
    let Stages { k, tmp, y_new, .. } = st;

    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k[0][i];
    }
    rhs.eval(t + C2 * h, tmp, &mut k[1])?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    rhs.eval(t + C3 * h, tmp, &mut k[2])?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    rhs.eval(t + C4 * h, tmp, &mut k[3])?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    rhs.eval(t + C5 * h, tmp, &mut k[4])?;
    for i in 0..n {
        tmp[i] = y[i]
            + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    rhs.eval(t + h, tmp, &mut k[5])?;
    for i in 0..n {
        y_new[i] = y[i]
            + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    rhs.eval(t + h, y_new, &mut k[6])?;
    Ok(())
}

/// Max-norm of the embedded error estimate scaled by `abs_tol + rel_tol |y|`.
fn error_norm(st: &Stages, y: &[f64], h: f64, config: &IntegratorConfig) -> f64 {
    let k = &st.k;
    let mut worst: f64 = 0.0;
    for i in 0..y.len() {
        let e = h
            * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                + E7 * k[6][i]);
        let scale = config.abs_tol + config.rel_tol * y[i].abs().max(st.y_new[i].abs());
        let ratio = (e / scale).abs();
        if ratio.is_nan() {
            return f64::INFINITY;
        }
        worst = worst.max(ratio);
    }
    worst
}

fn build_dense(st: &mut Stages, y: &[f64], h: f64) {
    let Stages { k, y_new, dense, .. } = st;
    for i in 0..y.len() {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        dense[0][i] = y[i];
        dense[1][i] = ydiff;
        dense[2][i] = bspl;
        dense[3][i] = ydiff - h * k[6][i] - bspl;
        dense[4][i] = h
            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                + D7 * k[6][i]);
    }
}

fn dense_eval(dense: &[Vec<f64>; 5], theta: f64) -> Vec<f64> {
    let theta1 = 1.0 - theta;
    (0..dense[0].len())
        .map(|i| {
            dense[0][i]
                + theta
                    * (dense[1][i]
                        + theta1 * (dense[2][i] + theta * (dense[3][i] + theta1 * dense[4][i])))
        })
        .collect()
}
