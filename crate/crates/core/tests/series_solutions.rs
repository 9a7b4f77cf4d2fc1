mod common;

use autores_core::asymptotics::{build_series, phase_roots};
use autores_core::model::ReducedParams;
use common::{loglog_slope, logspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> ReducedParams {
    let lambda = rng.gen_range(0.2..5.0);
    let f = rng.gen_range(0.2..3.0);
    let m_star = f / (4.0f64 * lambda).sqrt();
    let ratio = if rng.gen_bool(0.5) {
        rng.gen_range(0.1..0.9)
    } else {
        rng.gen_range(1.1..10.0)
    };
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    ReducedParams::new(lambda, f, sign * ratio * m_star).unwrap()
}

#[test]
fn closed_forms_on_random_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..20 {
        let p = random_params(&mut rng);
        for (branch, _) in phase_roots(&p).unwrap() {
            let sol = build_series(&p, branch, 4).unwrap();
            let (rho2, psi1) = (sol.rho_k(2), sol.psi_k(1));
            assert!((rho2 - sol.rho2_closed_form()).abs() <= 1e-12 * rho2.abs().max(1e-300), "{p:?} b{branch}");
            assert!((psi1 - sol.psi1_closed_form()).abs() <= 1e-12 * psi1.abs().max(1e-300), "{p:?} b{branch}");
            checked += 1;
        }
    }
    assert!(checked >= 40);
}

fn residual_slope(order: usize, which: usize) -> f64 {
    let p = ReducedParams::new(1.0, 1.0, 4.0).unwrap();
    let sol = build_series(&p, 1, order).unwrap();
    let pts: Vec<(f64, f64)> = logspace(1e2, 1e4, 9)
        .into_iter()
        .map(|tau| {
            let r = sol.residual(tau);
            (tau, if which == 0 { r.0.abs() } else { r.1.abs() })
        })
        .collect();
    loglog_slope(&pts)
}

#[test]
fn amplitude_residual_decays_at_predicted_rate() {
    let k2 = residual_slope(2, 0);
    let k4 = residual_slope(4, 0);
    assert!((k2 + 1.5).abs() <= 0.3, "{k2}");
    assert!((k4 + 2.5).abs() <= 0.3, "{k4}");
}

#[test]
fn phase_residual_carries_extra_amplitude_factor() {
    // the second equation is multiplied through by rho ~ sqrt(tau), so it
    // decays as tau^(-(K-1)/2); branch 1 has vanishing odd coefficients,
    // which makes even K inherit the rate of K + 1
    let k3 = residual_slope(3, 1);
    let k5 = residual_slope(5, 1);
    assert!((k3 + 1.0).abs() <= 0.3, "{k3}");
    assert!((k5 + 2.0).abs() <= 0.3, "{k5}");
}

#[test]
fn higher_order_is_more_accurate_far_out() {
    let p = ReducedParams::new(2.0, 0.7, -3.0).unwrap();
    for (branch, _) in phase_roots(&p).unwrap() {
        let lo = build_series(&p, branch, 2).unwrap();
        let hi = build_series(&p, branch, 6).unwrap();
        let tau = 1e4;
        assert!(hi.residual(tau).0.abs() < lo.residual(tau).0.abs(), "branch {branch}");
    }
}

#[test]
fn opposite_pumping_maps_branch_three_to_four() {
    // (rho, psi, m) -> (-rho(-x), psi(-x) + pi, -m) with x = tau^(-1/2)
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = random_params(&mut rng);
        if p.m.abs() <= p.m_star() {
            continue;
        }
        let q = ReducedParams { m: -p.m, ..p };
        let a = build_series(&p, 3, 6).unwrap();
        let b = build_series(&q, 4, 6).unwrap();
        let tol = 1e-10;
        assert!((b.psi0 - (a.psi0 - std::f64::consts::PI)).abs() < tol);
        for k in 0..=6 {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            assert!((b.rho_k(k) - sign * a.rho_k(k)).abs() <= tol * a.rho_k(k).abs().max(1.0), "rho_{k}");
        }
        for k in 1..=6 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b.psi_k(k) - sign * a.psi_k(k)).abs() <= tol * a.psi_k(k).abs().max(1.0), "psi_{k}");
        }
    }
}

#[test]
fn mirror_branches_share_low_orders_only() {
    let p = ReducedParams::new(1.0, 1.0, -4.0).unwrap();
    let a = build_series(&p, 3, 5).unwrap();
    let b = build_series(&p, 4, 5).unwrap();
    assert_eq!(a.psi0, -b.psi0);
    assert!((a.psi_k(1) - b.psi_k(1)).abs() < 1e-14);
    assert!((a.rho_k(2) - b.rho_k(2)).abs() < 1e-14);
    assert!((a.rho_k(3) + b.rho_k(3)).abs() < 1e-12);
    assert!((a.psi_k(2) + b.psi_k(2)).abs() < 1e-12);
    // beyond this the two expansions are genuinely different
    assert!((a.psi_k(3).abs() - b.psi_k(3).abs()).abs() > 1e-3);
}
