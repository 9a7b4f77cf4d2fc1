//! Deviation coordinates about an asymptotic solution and the Lyapunov
//! candidate built on them.
//!
//! With `rho = rho_* + r tau^(-1/4)`, `psi = psi_* + p` and `eta = (4/5) tau^(5/4)`
//! the slow flow becomes `r' = -dH/dp`, `p' = dH/dr + G`. Throughout this module
//! `s` denotes `sigma eta^(1/5)`, which equals `tau^(1/4)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{AsymptoticSolution, TAU_FLOOR};
use crate::error::{ModelError, Result};
use crate::model::{nu, reduced_rhs, ReducedParams, ReducedState, RHO_MIN};
use crate::stability::lyapunov_condition;

/// `sigma = (5/4)^(1/5)`.
pub const SIGMA: f64 = 1.045_639_552_591_273_2;

pub fn eta_of_tau(tau: f64) -> f64 {
    0.8 * tau.powf(1.25)
}

pub fn tau_of_eta(eta: f64) -> f64 {
    (1.25 * eta).powf(0.8)
}

/// Smallest `eta` at which the deviation system is evaluated.
pub fn eta_floor() -> f64 {
    eta_of_tau(TAU_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedState {
    pub r: f64,
    pub p: f64,
    pub eta: f64,
}

impl TransformedState {
    pub fn new(r: f64, p: f64, eta: f64) -> Self {
        Self { r, p, eta }
    }

    pub fn d(&self) -> f64 {
        self.r.hypot(self.p)
    }
}

pub fn to_transformed(rho: f64, psi: f64, tau: f64, sol: &AsymptoticSolution) -> TransformedState {
    let (rho_s, psi_s) = sol.eval(tau);
    TransformedState {
        r: (rho - rho_s) * tau.powf(0.25),
        p: psi - psi_s,
        eta: eta_of_tau(tau),
    }
}

pub fn from_transformed(state: &TransformedState, sol: &AsymptoticSolution) -> ReducedState {
    let tau = tau_of_eta(state.eta);
    let (rho_s, psi_s) = sol.eval(tau);
    ReducedState {
        rho: rho_s + state.r * tau.powf(-0.25),
        psi: psi_s + state.p,
        tau,
    }
}

/// Reference quantities along the asymptotic solution at a fixed `eta`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    rho: f64,
    psi: f64,
    nu: f64,
    s: f64,
    f: f64,
}

impl Frame {
    fn at(sol: &AsymptoticSolution, eta: f64) -> Self {
        let tau = tau_of_eta(eta);
        let (rho, psi) = sol.eval(tau);
        Self {
            rho,
            psi,
            nu: nu(tau, sol.params.m),
            s: SIGMA * eta.powf(0.2),
            f: sol.params.f,
        }
    }
}

// cos(a + p) - cos(a) and sin(a + p) - sin(a) without cancellation.
fn dcos(a: f64, p: f64) -> f64 {
    -2.0 * (0.5 * p).sin() * (a + 0.5 * p).sin()
}

fn dsin(a: f64, p: f64) -> f64 {
    2.0 * (0.5 * p).sin() * (a + 0.5 * p).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LyapunovPart {
    H,
    V1,
    V2,
    L,
}

fn h_value(st: &TransformedState, fr: &Frame) -> f64 {
    let TransformedState { r, p, eta } = *st;
    let Frame { rho, psi, nu, s, f, .. } = *fr;
    let dc2 = dcos(2.0 * psi, 2.0 * p);
    r * r * rho / (s * s) + r * r * r / (3.0 * s * s * s) + f * (dcos(psi, p) + p * psi.sin())
        - r * p / (5.0 * eta)
        - 0.5 * nu * rho * (dc2 + 2.0 * p * (2.0 * psi).sin())
        - 0.5 * nu * r / s * dc2
}

/// `g(p) = (m/2)[cos 2psi_0 - cos(2p + 2psi_0)] - 2 m_* [cos psi_0 - cos(p + psi_0)]`.
pub fn g(p: f64, psi0: f64, params: &ReducedParams) -> f64 {
    -0.5 * params.m * dcos(2.0 * psi0, 2.0 * p) + 2.0 * params.m_star() * dcos(psi0, p)
}

pub fn g_prime(p: f64, psi0: f64, params: &ReducedParams) -> f64 {
    params.m * (2.0 * p + 2.0 * psi0).sin() - 2.0 * params.m_star() * (p + psi0).sin()
}

fn v1_value(st: &TransformedState, fr: &Frame, sol: &AsymptoticSolution) -> f64 {
    let pr = &sol.params;
    let cubic = 4.0 * pr.lambda.sqrt() * pr.m_star() * st.r.powi(3) / (3.0 * pr.f);
    (st.r * g(st.p, sol.psi0, pr) + cubic) / fr.s.powi(3)
}

fn v2_value(st: &TransformedState) -> f64 {
    -st.r * st.p / (10.0 * st.eta)
}

pub fn hamiltonian(state: &TransformedState, sol: &AsymptoticSolution, which: LyapunovPart) -> f64 {
    let fr = Frame::at(sol, state.eta);
    match which {
        LyapunovPart::H => h_value(state, &fr),
        LyapunovPart::V1 => v1_value(state, &fr, sol),
        LyapunovPart::V2 => v2_value(state),
        LyapunovPart::L => h_value(state, &fr) + v1_value(state, &fr, sol) + v2_value(state),
    }
}

fn h_partials(st: &TransformedState, fr: &Frame) -> (f64, f64) {
    let TransformedState { r, p, eta } = *st;
    let Frame { rho, psi, nu, s, f, .. } = *fr;
    let dh_dp = -f * dsin(psi, p) - r / (5.0 * eta)
        + nu * rho * dsin(2.0 * psi, 2.0 * p)
        + nu * r / s * (2.0 * p + 2.0 * psi).sin();
    let dh_dr = 2.0 * r * rho / (s * s) + r * r / s.powi(3) - p / (5.0 * eta) - 0.5 * nu / s * dcos(2.0 * psi, 2.0 * p);
    (dh_dp, dh_dr)
}

fn g_remainder(st: &TransformedState, fr: &Frame) -> Result<f64> {
    let TransformedState { r, p, eta } = *st;
    let Frame { rho, psi, nu, s, f, .. } = *fr;
    let shifted = rho + r / s;
    if !(shifted > RHO_MIN) {
        return Err(ModelError::AmplitudeSingular {
            rho: shifted,
            floor: RHO_MIN,
        });
    }
    Ok(-0.5 * nu / s * dcos(2.0 * psi, 2.0 * p)
        + f / s * ((p + psi).cos() / shifted - psi.cos() / rho)
        + p / (5.0 * eta))
}

fn rhs_in_frame(st: &TransformedState, fr: &Frame) -> Result<(f64, f64)> {
    let (dh_dp, dh_dr) = h_partials(st, fr);
    Ok((-dh_dp, dh_dr + g_remainder(st, fr)?))
}

/// `(dr/deta, dp/deta)`.
pub fn transformed_rhs(state: &TransformedState, sol: &AsymptoticSolution) -> Result<(f64, f64)> {
    rhs_in_frame(state, &Frame::at(sol, state.eta))
}

/// Right-hand side of the deviation system at the origin when the true
/// derivative of the truncated series is used in place of the slow flow.
/// Measures how far the truncated series is from an exact solution.
pub fn origin_defect(sol: &AsymptoticSolution, eta: f64) -> Result<(f64, f64)> {
    let tau = tau_of_eta(eta);
    let (rho, psi) = sol.eval(tau);
    let (drho, dpsi) = sol.eval_derivative(tau);
    let (frho, fpsi) = reduced_rhs(&ReducedState { rho, psi, tau }, &sol.params, true)?;
    Ok((frho - drho, tau.powf(-0.25) * (fpsi - dpsi)))
}

fn l_gradient(st: &TransformedState, fr: &Frame, sol: &AsymptoticSolution) -> (f64, f64) {
    let pr = &sol.params;
    let (dh_dp, dh_dr) = h_partials(st, fr);
    let s3 = fr.s.powi(3);
    let dl_dr = dh_dr + (g(st.p, sol.psi0, pr) + 4.0 * pr.lambda.sqrt() * pr.m_star() * st.r * st.r / pr.f) / s3
        - st.p / (10.0 * st.eta);
    let dl_dp = dh_dp + st.r * g_prime(st.p, sol.psi0, pr) / s3 - st.r / (10.0 * st.eta);
    (dl_dr, dl_dp)
}

fn l_partial_eta(st: &TransformedState, sol: &AsymptoticSolution) -> f64 {
    let at = |eta: f64| hamiltonian(&TransformedState { eta, ..*st }, sol, LyapunovPart::L);
    let central = |h: f64| (at(st.eta + h) - at(st.eta - h)) / (2.0 * h);
    let h = st.eta * 1e-6;
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

/// Total derivative of `L` along the deviation system.
pub fn lyapunov_rate(state: &TransformedState, sol: &AsymptoticSolution) -> Result<f64> {
    let fr = Frame::at(sol, state.eta);
    let (dr, dp) = rhs_in_frame(state, &fr)?;
    let (lr, lp) = l_gradient(state, &fr, sol);
    Ok(l_partial_eta(state, sol) + lr * dr + lp * dp)
}

/// Coefficient of `p^2` in the leading quadratic form of `L`.
pub fn phase_coefficient(sol: &AsymptoticSolution) -> f64 {
    let p = &sol.params;
    let m_star = p.m_star();
    p.f * (p.m * (2.0 * sol.psi0).cos() - m_star * sol.psi0.cos()) / (2.0 * m_star)
}

/// `Q(r, p) = sqrt(lambda) r^2 + c_p p^2`.
pub fn leading_form(r: f64, p: f64, sol: &AsymptoticSolution) -> f64 {
    sol.params.lambda.sqrt() * r * r + phase_coefficient(sol) * p * p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovDomain {
    pub d_star: f64,
    pub eta_star: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl LyapunovDomain {
    pub fn new(d_star: f64, eta_star: f64, eps1: f64, eps2: f64) -> Result<Self> {
        let dom = Self {
            d_star,
            eta_star,
            eps1,
            eps2,
        };
        dom.validate()?;
        Ok(dom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_star > 0.0 && self.d_star.is_finite()) {
            return Err(ModelError::invalid("d_star", self.d_star, "must be positive"));
        }
        if !(self.eta_star > 0.0 && self.eta_star.is_finite()) {
            return Err(ModelError::invalid("eta_star", self.eta_star, "must be positive"));
        }
        for (name, v) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ModelError::invalid(name, v, "must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// `(A, B)`: the smaller and larger coefficient of the leading form.
    pub fn quadratic_constants(&self, sol: &AsymptoticSolution) -> (f64, f64) {
        let a = sol.params.lambda.sqrt();
        let c = phase_coefficient(sol);
        (a.min(c), a.max(c))
    }

    /// Guaranteed decay exponent `beta = (1 - eps2) A / (5 (1 + eps1) B)`.
    pub fn beta(&self, sol: &AsymptoticSolution) -> f64 {
        let (a, b) = self.quadratic_constants(sol);
        (1.0 - self.eps2) * a / (5.0 * (1.0 + self.eps1) * b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub branch: u8,
    pub params: ReducedParams,
    pub domain: LyapunovDomain,
    pub seed: u64,
    pub samples: usize,
    pub bound_violations: usize,
    pub derivative_violations: usize,
    /// Samples at which the rate could not be evaluated; also counted as derivative violations.
    pub failed_samples: usize,
    pub min_margin: f64,
    /// Whether the branch and parameters satisfy the condition under which `L` is a certificate.
    pub applicable: bool,
}

impl LyapunovReport {
    pub fn passed(&self) -> bool {
        self.bound_violations == 0 && self.derivative_violations == 0
    }
}

/// The `i`-th sample point of a domain for a given seed, independent of any
/// partitioning of the sample range.
pub fn sample_point(domain: &LyapunovDomain, seed: u64, i: u64) -> TransformedState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let radius = domain.d_star * rng.gen::<f64>().sqrt();
    let angle = std::f64::consts::TAU * rng.gen::<f64>();
    let eta = domain.eta_star * 10f64.powf(3.0 * rng.gen::<f64>());
    TransformedState {
        r: radius * angle.cos(),
        p: radius * angle.sin(),
        eta,
    }
}

struct SampleOutcome {
    bound_ok: bool,
    rate_ok: bool,
    failed: bool,
    margin: f64,
}

fn evaluate_sample(st: &TransformedState, sol: &AsymptoticSolution, dom: &LyapunovDomain) -> SampleOutcome {
    let q = leading_form(st.r, st.p, sol);
    let l = hamiltonian(st, sol, LyapunovPart::L);
    let lower = l - (1.0 - dom.eps1) * q;
    let upper = (1.0 + dom.eps1) * q - l;
    let bound_ok = lower >= 0.0 && upper >= 0.0;
    match lyapunov_rate(st, sol) {
        Ok(rate) => {
            let slack = -(1.0 - dom.eps2) * q / (5.0 * st.eta) - rate;
            SampleOutcome {
                bound_ok,
                rate_ok: slack >= 0.0,
                failed: false,
                margin: lower.min(upper).min(slack),
            }
        }
        Err(_) => SampleOutcome {
            bound_ok,
            rate_ok: false,
            failed: true,
            margin: lower.min(upper),
        },
    }
}

/// Samples the domain and counts violations of the two-sided bound on `L`
/// and of the decay bound on its rate.
pub fn check_bounds(sol: &AsymptoticSolution, domain: &LyapunovDomain, n_samples: usize, seed: u64) -> LyapunovReport {
    let outcomes: Vec<SampleOutcome> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| evaluate_sample(&sample_point(domain, seed, i), sol, domain))
        .collect();
    LyapunovReport {
        branch: sol.branch,
        params: sol.params,
        domain: *domain,
        seed,
        samples: n_samples,
        bound_violations: outcomes.iter().filter(|o| !o.bound_ok).count(),
        derivative_violations: outcomes.iter().filter(|o| !o.rate_ok).count(),
        failed_samples: outcomes.iter().filter(|o| o.failed).count(),
        min_margin: outcomes.iter().map(|o| o.margin).fold(f64::INFINITY, f64::min),
        applicable: lyapunov_condition(&sol.params, sol.branch),
    }
}

/// A domain on which `check_bounds` passed, stored so the check can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenDomain {
    pub branch: u8,
    pub params: ReducedParams,
    pub d_star: f64,
    pub eta_star: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub seed: u64,
}

impl FrozenDomain {
    pub fn domain(&self) -> LyapunovDomain {
        LyapunovDomain {
            d_star: self.d_star,
            eta_star: self.eta_star,
            eps1: self.eps1,
            eps2: self.eps2,
        }
    }
}

/// Grid over which [`search_domain`] looks for a passing domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    /// Tried in the given order for each `eta_star`.
    pub d_stars: Vec<f64>,
    /// Tried in the given order.
    pub eta_stars: Vec<f64>,
    pub eps1: f64,
    pub eps2: f64,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            d_stars: vec![0.2, 0.1, 0.05, 0.02, 0.01],
            eta_stars: vec![1e2, 1e3, 1e4, 1e5, 1e6],
            eps1: 0.5,
            eps2: 0.5,
        }
    }
}

/// First grid cell (smallest `eta_star`, then largest `d_star`) with zero violations.
pub fn search_domain(sol: &AsymptoticSolution, grid: &SearchGrid, n_samples: usize, seed: u64) -> Option<FrozenDomain> {
    for &eta_star in &grid.eta_stars {
        for &d_star in &grid.d_stars {
            let domain = LyapunovDomain {
                d_star,
                eta_star,
                eps1: grid.eps1,
                eps2: grid.eps2,
            };
            if check_bounds(sol, &domain, n_samples, seed).passed() {
                return Some(FrozenDomain {
                    branch: sol.branch,
                    params: sol.params,
                    d_star,
                    eta_star,
                    eps1: grid.eps1,
                    eps2: grid.eps2,
                    seed,
                });
            }
        }
    }
    None
}
