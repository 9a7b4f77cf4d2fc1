//! Linearization about the asymptotic solutions, leading discriminants and the
//! stability map of the four autoresonant branches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{phase_roots, AsymptoticSolution};
use crate::error::{ModelError, Result};
use crate::lyapunov::{tau_of_eta, SIGMA};
use crate::model::{nu, reduce_params, OscillatorParams, ReducedParams};

/// Relative distance of `|m|` from `m_*` treated as the bifurcation itself.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizationPoint {
    pub branch: u8,
    pub eta: f64,
    /// Row-major linearization matrix of the deviation system at the origin.
    pub matrix: [[f64; 2]; 2],
    /// `(mu_+, mu_-)`.
    pub eigen: (Complex64, Complex64),
}

impl LinearizationPoint {
    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// `delta(eta)`, half the trace.
    pub fn delta(&self) -> f64 {
        0.5 * self.trace()
    }

    /// `D(eta) = delta^2 - det`, so that `mu = delta +- sqrt(D)`.
    pub fn discriminant(&self) -> f64 {
        let d = self.delta();
        d * d - self.det()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Stable,
    Unstable,
    Degenerate,
    NotPresent,
    /// Purely imaginary leading eigenvalues without a Lyapunov certificate.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    LinearUnstable,
    LyapunovStable,
    DegenerateBoundary,
    RootAbsent,
    LinearInconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub branch: u8,
    pub regime: Regime,
    /// Leading discriminant `D_0`; absent when the branch does not exist.
    pub d0: Option<f64>,
    pub m_star: f64,
    pub justification: Justification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OscillatorRegime {
    /// Only the anti-phase mode (`psi -> pi`) is stable.
    AntiPhaseOnly,
    /// Two stable modes with these limiting phase mismatches.
    TwoStableModes { psi0: (f64, f64) },
    Degenerate,
}

/// Linearization matrix of the deviation system about `sol` at `eta`.
pub fn jacobian(sol: &AsymptoticSolution, eta: f64) -> LinearizationPoint {
    let p = &sol.params;
    let tau = tau_of_eta(eta);
    let (rho, psi) = sol.eval(tau);
    let pump = nu(tau, p.m);
    // s = sigma eta^(1/5) = tau^(1/4)
    let s = SIGMA * eta.powf(0.2);
    let (sin1, cos1) = psi.sin_cos();
    let (sin2, cos2) = (2.0 * psi).sin_cos();

    let a11 = 1.0 / (5.0 * eta) - pump * sin2 / s;
    let a12 = p.f * cos1 - 2.0 * pump * rho * cos2;
    let a21 = (2.0 * rho - p.f * cos1 / (rho * rho)) / (s * s);
    let a22 = (2.0 * pump * sin2 - p.f * sin1 / rho) / s;
    let matrix = [[a11, a12], [a21, a22]];

    let delta = 0.5 * (a11 + a22);
    let det = a11 * a22 - a12 * a21;
    let root = Complex64::new(delta * delta - det, 0.0).sqrt();
    let centre = Complex64::new(delta, 0.0);
    LinearizationPoint {
        branch: sol.branch,
        eta,
        matrix,
        eigen: (centre + root, centre - root),
    }
}

/// Closed-form leading discriminant `D_0` of a branch.
pub fn d0(params: &ReducedParams, branch: u8) -> Result<f64> {
    if !phase_roots(params)?.iter().any(|&(b, _)| b == branch) {
        return Err(ModelError::BranchAbsent { branch });
    }
    Ok(d0_formula(params, branch))
}

fn d0_formula(params: &ReducedParams, branch: u8) -> f64 {
    let ReducedParams { lambda, m, .. } = *params;
    let m_star = params.m_star();
    match branch {
        1 => 4.0 * (m_star - m) * lambda,
        2 => -4.0 * (m_star + m) * lambda,
        _ => 4.0 * (m * m - m_star * m_star) * lambda / m,
    }
}

fn is_degenerate(params: &ReducedParams) -> bool {
    let m_star = params.m_star();
    (params.m.abs() - m_star).abs() <= DEGENERACY_TOL * m_star
}

/// Parameter condition under which the Lyapunov construction certifies a branch.
pub fn lyapunov_condition(params: &ReducedParams, branch: u8) -> bool {
    if is_degenerate(params) {
        return false;
    }
    let (m, m_star) = (params.m, params.m_star());
    match branch {
        1 => m > m_star,
        2 => m > -m_star,
        3 | 4 => m < -m_star,
        _ => false,
    }
}

/// Stability verdicts for branches 1..=4.
pub fn classify(params: &ReducedParams) -> Vec<StabilityVerdict> {
    let m_star = params.m_star();
    let degenerate = is_degenerate(params);
    let present = |branch: u8| branch <= 2 || params.m.abs() > m_star;

    (1..=4)
        .map(|branch| {
            let (regime, justification, d0) = if degenerate {
                (Regime::Degenerate, Justification::DegenerateBoundary, Some(d0_formula(params, branch)))
            } else if !present(branch) {
                (Regime::NotPresent, Justification::RootAbsent, None)
            } else {
                let d0 = d0_formula(params, branch);
                if d0 > 0.0 {
                    (Regime::Unstable, Justification::LinearUnstable, Some(d0))
                } else if lyapunov_condition(params, branch) {
                    (Regime::Stable, Justification::LyapunovStable, Some(d0))
                } else {
                    (Regime::Inconclusive, Justification::LinearInconclusive, Some(d0))
                }
            };
            StabilityVerdict {
                branch,
                regime,
                d0,
                m_star,
                justification,
            }
        })
        .collect()
}

/// Limiting phases of the stable branches, in branch order.
pub fn stable_phases(params: &ReducedParams) -> Vec<(u8, f64)> {
    let verdicts = classify(params);
    let roots = phase_roots(params).unwrap_or_default();
    verdicts
        .iter()
        .filter(|v| v.regime == Regime::Stable)
        .filter_map(|v| roots.iter().find(|r| r.0 == v.branch).copied())
        .collect()
}

/// `mu = eps alpha^(-3/4)`.
pub fn sweep_ratio(params: &OscillatorParams) -> f64 {
    params.eps * params.alpha.powf(-0.75)
}

/// `mu_0 = (16 h0^2 / (3 gamma f0^2))^(3/4)`.
pub fn critical_sweep_ratio(params: &OscillatorParams) -> f64 {
    (16.0 * params.h0 * params.h0 / (3.0 * params.gamma * params.f0 * params.f0)).powf(0.75)
}

/// Which autoresonant modes of the oscillator are stable.
///
/// `|m| / m_* = (mu_0 / mu)^(2/3)` under the averaging map, so `mu > mu_0`
/// leaves only the anti-phase mode, while `mu < mu_0` gives the pair
/// `{0, pi}` for `h0 > 0` and `+-arccos(-(mu / mu_0)^(2/3))` for `h0 < 0`.
pub fn oscillator_regime(params: &OscillatorParams) -> Result<OscillatorRegime> {
    params.validate()?;
    if !(params.alpha > 0.0) {
        return Err(ModelError::NonPositiveLambda {
            alpha: params.alpha,
        });
    }
    if !(params.f0 > 0.0) {
        return Err(ModelError::NonPositiveDrive { f0: params.f0 });
    }
    let mu = sweep_ratio(params);
    let mu0 = critical_sweep_ratio(params);
    if mu0 == 0.0 {
        return Ok(OscillatorRegime::AntiPhaseOnly);
    }
    let ratio = (mu / mu0).powf(2.0 / 3.0); // = m_* / |m|
    if (1.0 / ratio - 1.0).abs() <= DEGENERACY_TOL {
        return Ok(OscillatorRegime::Degenerate);
    }
    if mu > mu0 {
        return Ok(OscillatorRegime::AntiPhaseOnly);
    }
    if params.h0 > 0.0 {
        Ok(OscillatorRegime::TwoStableModes {
            psi0: (0.0, std::f64::consts::PI),
        })
    } else {
        let a = (-ratio).acos();
        Ok(OscillatorRegime::TwoStableModes { psi0: (a, -a) })
    }
}

/// Same question answered through the slow-flow classification.
pub fn oscillator_regime_via_reduction(params: &OscillatorParams) -> Result<OscillatorRegime> {
    let reduced = reduce_params(params)?;
    if is_degenerate(&reduced) {
        return Ok(OscillatorRegime::Degenerate);
    }
    let phases = stable_phases(&reduced);
    match phases.as_slice() {
        [(2, _)] => Ok(OscillatorRegime::AntiPhaseOnly),
        [(_, a), (_, b)] => Ok(OscillatorRegime::TwoStableModes { psi0: (*a, *b) }),
        _ => unreachable!("the slow flow has one or two stable branches off the bifurcation"),
    }
}
