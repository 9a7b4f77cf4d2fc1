//! Power-series autoresonant solutions
//! `rho_*(tau) = sqrt(lambda tau) + sum_k rho_k tau^(-k/2)`,
//! `psi_*(tau) = psi_0 + sum_k psi_k tau^(-k/2)` of the parametrically pumped slow flow.
//!
//! Coefficients are obtained by substituting the ansatz into both equations
//! with the series engine and solving, order by order, the 2x2 linear system
//! for the next pair of unknowns. The system matrix at each order is read off
//! the engine itself by unit perturbations of the unknowns.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{nu, ReducedParams};
use crate::series::HalfPowerSeries;

/// Smallest slow time at which the truncated series is evaluated by default.
pub const TAU_FLOOR: f64 = 1.0;

/// Relative tolerance on `|m| = m_*` for refusing to build roots.
pub const ROOT_DEGENERACY_TOL: f64 = 1e-12;

/// Condition number above which an order's linear system is declared singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSolution {
    /// Branch index 1..=4.
    pub branch: u8,
    pub psi0: f64,
    /// `rho_0 ..= rho_K`.
    pub rho_coeffs: Vec<f64>,
    /// `psi_1 ..= psi_K`.
    pub psi_coeffs: Vec<f64>,
    /// Truncation order `K`.
    pub order: usize,
    pub params: ReducedParams,
}

/// Phase roots `psi_0` of `(m_* - m cos psi_0) sin psi_0 = 0`, tagged by branch.
///
/// Branches 3 and 4 exist only for `|m| > m_*`.
pub fn phase_roots(params: &ReducedParams) -> Result<Vec<(u8, f64)>> {
    params.validate()?;
    let m_star = params.m_star();
    if (params.m.abs() - m_star).abs() <= ROOT_DEGENERACY_TOL * m_star {
        return Err(ModelError::DegeneratePumping {
            m: params.m,
            m_star,
        });
    }
    let mut roots = vec![(1, 0.0), (2, PI)];
    if params.m.abs() > m_star {
        let a = (m_star / params.m).acos();
        roots.push((3, a));
        roots.push((4, -a));
    }
    Ok(roots)
}

pub fn branch_root(params: &ReducedParams, branch: u8) -> Result<f64> {
    phase_roots(params)?
        .into_iter()
        .find(|&(b, _)| b == branch)
        .map(|(_, psi0)| psi0)
        .ok_or(ModelError::BranchAbsent { branch })
}

/// Residual series `(E1, E2)` of the slow flow for the ansatz with the given
/// coefficients (`rho[k] = rho_k`, `psi[k] = psi_k`, `psi[0] = psi_0`), all
/// series carried through `order`.
///
/// `E1 = rho' + nu rho sin 2psi - f sin psi` and
/// `E2 = psi' + nu cos 2psi - rho^2 + lambda tau - f cos psi / rho`.
fn equation_series(
    params: &ReducedParams,
    rho: &[f64],
    psi: &[f64],
    order: i32,
) -> (HalfPowerSeries, HalfPowerSeries) {
    let n = order as usize;
    let mut rc = vec![params.lambda.sqrt()];
    rc.extend((0..=n).map(|k| rho.get(k).copied().unwrap_or(0.0)));
    let rho_s = HalfPowerSeries::new(-1, rc);
    let psi_s = HalfPowerSeries::new(0, (0..=n).map(|k| psi.get(k).copied().unwrap_or(0.0)).collect());

    let pump = HalfPowerSeries::decaying_pump(params.m, order);
    let (sin1, cos1) = psi_s.sin_cos();
    let (sin2, cos2) = psi_s.scale(2.0).sin_cos();

    let e1 = &(&rho_s.d_dtau() + &(&(&pump * &rho_s) * &sin2)) - &sin1.scale(params.f);

    let sweep = HalfPowerSeries::monomial(params.lambda, -2, order + 2);
    let e2 = &(&(&psi_s.d_dtau() + &(&pump * &cos2)) - &(&rho_s * &rho_s)) + &sweep;
    let e2 = &e2 - &(&cos1 * &rho_s.recip()).scale(params.f);
    (e1, e2)
}

fn condition_number(m: [[f64; 2]; 2]) -> f64 {
    // singular values of a 2x2 from the invariants of M^T M
    let [[a, b], [c, d]] = m;
    let frob2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let s_max2 = 0.5 * (frob2 + disc);
    let s_min2 = 0.5 * (frob2 - disc);
    if s_min2 <= 0.0 || det == 0.0 {
        return f64::INFINITY;
    }
    // s_min from det to avoid cancellation
    let s_max = s_max2.sqrt();
    s_max / (det / s_max)
}

/// Builds the truncated asymptotic solution of order `order` (`K >= 2`) on a branch.
pub fn build_series(params: &ReducedParams, branch: u8, order: usize) -> Result<AsymptoticSolution> {
    if order < 2 {
        return Err(ModelError::invalid("order", order as f64, "truncation order must be at least 2"));
    }
    let psi0 = branch_root(params, branch)?;
    let work = order as i32 + 2;

    let mut rho = vec![0.0; order + 2];
    let mut psi = vec![0.0; order + 3];
    psi[0] = psi0;

    // at step k the unknowns (rho_{k-1}, psi_k) are fixed by the x^(k-2)
    // coefficient of E2 and the x^k coefficient of E1
    for k in 1..=order + 1 {
        let probe = |rho: &[f64], psi: &[f64]| {
            let (e1, e2) = equation_series(params, rho, psi, work);
            [e2.coeff(k as i32 - 2), e1.coeff(k as i32)]
        };
        let base = probe(&rho, &psi);
        rho[k - 1] = 1.0;
        let with_rho = probe(&rho, &psi);
        rho[k - 1] = 0.0;
        psi[k] = 1.0;
        let with_psi = probe(&rho, &psi);
        psi[k] = 0.0;

        let m = [
            [with_rho[0] - base[0], with_psi[0] - base[0]],
            [with_rho[1] - base[1], with_psi[1] - base[1]],
        ];
        let cond = condition_number(m);
        if !(cond <= MAX_CONDITION) {
            return Err(ModelError::SingularRecurrence {
                order: k,
                condition: cond,
            });
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let (r0, r1) = (-base[0], -base[1]);
        rho[k - 1] = (r0 * m[1][1] - m[0][1] * r1) / det;
        psi[k] = (m[0][0] * r1 - m[1][0] * r0) / det;
    }

    Ok(AsymptoticSolution {
        branch,
        psi0,
        rho_coeffs: rho[..=order].to_vec(),
        psi_coeffs: psi[1..=order].to_vec(),
        order,
        params: *params,
    })
}

impl AsymptoticSolution {
    /// `rho_k`.
    pub fn rho_k(&self, k: usize) -> f64 {
        self.rho_coeffs[k]
    }

    /// `psi_k` for `k >= 1`; `psi_k(0)` is the root.
    pub fn psi_k(&self, k: usize) -> f64 {
        if k == 0 {
            self.psi0
        } else {
            self.psi_coeffs[k - 1]
        }
    }

    /// Truncated `(rho_*(tau), psi_*(tau))`.
    pub fn eval(&self, tau: f64) -> (f64, f64) {
        let x = 1.0 / tau.sqrt();
        let mut rho = 0.0;
        for c in self.rho_coeffs.iter().rev() {
            rho = rho * x + c;
        }
        let mut psi = 0.0;
        for c in self.psi_coeffs.iter().rev() {
            psi = psi * x + c;
        }
        ((self.params.lambda * tau).sqrt() + rho, self.psi0 + psi * x)
    }

    /// Term-by-term `tau` derivatives `(rho_*', psi_*')`.
    pub fn eval_derivative(&self, tau: f64) -> (f64, f64) {
        let x = 1.0 / tau.sqrt();
        let x2 = x * x;
        let mut drho = 0.5 * self.params.lambda.sqrt() * x;
        let mut xk = 1.0;
        for (k, c) in self.rho_coeffs.iter().enumerate() {
            drho -= 0.5 * k as f64 * c * xk * x2;
            xk *= x;
        }
        let mut dpsi = 0.0;
        let mut xk = x;
        for (i, c) in self.psi_coeffs.iter().enumerate() {
            dpsi -= 0.5 * (i + 1) as f64 * c * xk * x2;
            xk *= x;
        }
        (drho, dpsi)
    }

    /// Defects of both slow-flow equations on the truncated solution:
    /// `rho' + nu rho sin 2psi - f sin psi` and
    /// `rho (psi' + nu cos 2psi - rho^2 + lambda tau) - f cos psi`.
    pub fn residual(&self, tau: f64) -> (f64, f64) {
        let (rho, psi) = self.eval(tau);
        let (drho, dpsi) = self.eval_derivative(tau);
        let p = &self.params;
        let pump = nu(tau, p.m);
        let res_rho = drho + pump * rho * (2.0 * psi).sin() - p.f * psi.sin();
        // rho^2 - lambda tau formed as (rho - sqrt(lambda tau)) (rho + sqrt(lambda tau))
        let lead = (p.lambda * tau).sqrt();
        let excess = (rho - lead) * (rho + lead);
        let res_psi = rho * (dpsi + pump * (2.0 * psi).cos() - excess) - p.f * psi.cos();
        (res_rho, res_psi)
    }

    /// Closed-form `rho_2` for this branch.
    pub fn rho2_closed_form(&self) -> f64 {
        let p = &self.params;
        (p.m * (2.0 * self.psi0).cos() - 2.0 * p.m_star() * self.psi0.cos()) / (4.0 * p.lambda).sqrt()
    }

    /// Closed-form `psi_1` for this branch.
    pub fn psi1_closed_form(&self) -> f64 {
        let p = &self.params;
        1.0 / (4.0 * p.m_star() * self.psi0.cos() - 4.0 * p.m * (2.0 * self.psi0).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: f64) -> ReducedParams {
        ReducedParams::new(1.0, 1.0, m).unwrap()
    }

    #[test]
    fn roots_four_branches() {
        let roots = phase_roots(&params(4.0)).unwrap();
        assert_eq!(roots.len(), 4);
        let a = (0.125f64).acos();
        assert!((a - 1.445_468_495_626_831).abs() < 1e-12);
        assert_eq!(roots[2], (3, a));
        assert_eq!(roots[3], (4, -a));
        for (_, psi0) in roots {
            let m_star = 0.5;
            assert!(((m_star - 4.0 * psi0.cos()) * psi0.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_two_branches() {
        assert_eq!(phase_roots(&params(0.0)).unwrap(), vec![(1, 0.0), (2, PI)]);
        assert_eq!(phase_roots(&params(-0.3)).unwrap().len(), 2);
    }

    #[test]
    fn roots_degenerate() {
        for m in [0.5, -0.5] {
            assert!(matches!(
                phase_roots(&params(m)),
                Err(ModelError::DegeneratePumping { .. })
            ));
        }
        assert!(matches!(
            build_series(&params(0.5), 1, 4),
            Err(ModelError::DegeneratePumping { .. })
        ));
    }

    #[test]
    fn absent_branch() {
        assert_eq!(build_series(&params(0.2), 3, 3), Err(ModelError::BranchAbsent { branch: 3 }));
    }

    #[test]
    fn low_order_coefficients_branch1() {
        let sol = build_series(&params(4.0), 1, 4).unwrap();
        assert_eq!(sol.rho_coeffs.len(), 5);
        assert_eq!(sol.psi_coeffs.len(), 4);
        assert!(sol.rho_k(0).abs() < 1e-14);
        assert!(sol.rho_k(1).abs() < 1e-14);
        assert!((sol.rho_k(2) - 1.5).abs() < 1e-13);
        assert!((sol.psi_k(1) + 1.0 / 14.0).abs() < 1e-14);
    }

    #[test]
    fn low_order_coefficients_branch2_no_pumping() {
        let sol = build_series(&params(0.0), 2, 2).unwrap();
        assert!((sol.rho_k(2) - 0.5).abs() < 1e-13);
        assert!((sol.psi_k(1) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn eval_k2_branch1() {
        let sol = build_series(&params(4.0), 1, 2).unwrap();
        let (rho, psi) = sol.eval(100.0);
        assert!((rho - 10.015).abs() < 1e-12);
        assert!((psi + 0.1 / 14.0).abs() < 1e-12);
        let (_, psi_far) = sol.eval(1e16);
        assert!(psi_far.abs() < 1e-8);
        let sol2 = build_series(&params(4.0), 2, 3).unwrap();
        assert!((sol2.eval(1e14).1 - PI).abs() < 1e-6);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let sol = build_series(&params(-3.0), 3, 5).unwrap();
        for tau in [2.0, 30.0, 500.0] {
            let h = 1e-4 * tau;
            let (a1, b1) = sol.eval(tau + h);
            let (a0, b0) = sol.eval(tau - h);
            let (da, db) = sol.eval_derivative(tau);
            assert!((da - (a1 - a0) / (2.0 * h)).abs() < 1e-8);
            assert!((db - (b1 - b0) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn near_degenerate_is_singular() {
        let p = ReducedParams::new(1.0, 1.0, 0.5 * (1.0 + 1.5e-12)).unwrap();
        assert!(matches!(
            build_series(&p, 1, 3),
            Err(ModelError::SingularRecurrence { .. })
        ));
    }

    #[test]
    fn order_too_small() {
        assert!(build_series(&params(4.0), 1, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let sol = build_series(&params(4.0), 3, 4).unwrap();
        let text = serde_json::to_string(&sol).unwrap();
        let back: AsymptoticSolution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sol);
    }
}
