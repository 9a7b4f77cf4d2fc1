//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! to stderr (bypassing output capture) before asserting.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use autores_core::asymptotics::{build_series, phase_roots};
use autores_core::integrate::{integrate, IntegratorConfig};
use autores_core::lyapunov::{check_bounds, tau_of_eta, transformed_rhs, FrozenDomain, TransformedState};
use autores_core::model::{reduce_params, reduced_rhs, OscillatorParams, ReducedParams, ReducedState};
use autores_core::stability::{d0, jacobian, oscillator_regime, stable_phases, OscillatorRegime};
use autores_core::ModelError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

// Criteria carry runtime limits, so they run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(n: u32, title: &str, pass: bool, elapsed: Duration, limit_s: f64, detail: &str) {
    let in_time = elapsed.as_secs_f64() < limit_s;
    let ok = pass && in_time;
    let line = format!(
        "[acceptance] criterion {n:>2} {} {title}: {detail} ({:.2} s, limit {limit_s} s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} ({title}) failed: {detail}");
    assert!(in_time, "criterion {n} ({title}) exceeded {limit_s} s");
}

fn autores(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_autores"))
        .args(args)
        .arg(format!("--out-dir={}", dir.display()))
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn unit(m: f64) -> ReducedParams {
    ReducedParams::new(1.0, 1.0, m).unwrap()
}

#[test]
fn criterion_01_table_reproduction() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let tmp = TempDir::new().unwrap();
    let start = Instant::now();
    autores(tmp.path(), &["classify", "--lambda=1", "--f=1", "--m-ratios=-3,-1.5,-0.5,0,0.5,1.5,3"]);
    let elapsed = start.elapsed();
    let rows = read_json(&tmp.path().join("classify.json"));
    // columns m < -m_*, |m| < m_*, m > m_*; rows are branches 1..4
    let table = [
        ["Unstable", "Unstable", "Stable"],
        ["Unstable", "Stable", "Stable"],
        ["Stable", "NotPresent", "Unstable"],
        ["Stable", "NotPresent", "Unstable"],
    ];
    let mut mismatches = Vec::new();
    for row in rows.as_array().unwrap() {
        let ratio = row["m_ratio"].as_f64().unwrap();
        let col = if ratio < -1.0 { 0 } else if ratio < 1.0 { 1 } else { 2 };
        for (b, v) in row["verdicts"].as_array().unwrap().iter().enumerate() {
            if v["regime"] != table[b][col] {
                mismatches.push(format!("m/m_*={ratio} branch {}: {}", b + 1, v["regime"]));
            }
        }
    }
    verdict(
        1,
        "stability table",
        mismatches.is_empty() && rows.as_array().unwrap().len() == 7,
        elapsed,
        1.0,
        &format!("28 cells, mismatches {mismatches:?}"),
    );
}

#[test]
fn criterion_02_leading_discriminants() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let p = unit(4.0);
    let got: Vec<f64> = (1..=3).map(|b| d0(&p, b).unwrap()).collect();
    let expected = [-14.0, -18.0, 15.75];
    let worst = got
        .iter()
        .zip(expected)
        .map(|(g, e)| ((g - e) / e).abs())
        .fold(0.0, f64::max);
    verdict(2, "D0 spot values", worst <= 1e-12, start.elapsed(), 1.0, &format!("{got:?}, worst relative error {worst:e}"));
}

#[test]
fn criterion_03_series_closed_forms() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut worst, mut points, mut cases) = (0.0f64, 0, 0);
    while points < 20 {
        let lambda = rng.gen_range(0.2..5.0);
        let f = rng.gen_range(0.2..3.0);
        let m = rng.gen_range(-6.0..6.0);
        let p = ReducedParams::new(lambda, f, m).unwrap();
        let Ok(roots) = phase_roots(&p) else { continue };
        points += 1;
        for (branch, psi0) in roots {
            let sol = build_series(&p, branch, 4).unwrap();
            let m_star = f / (4.0 * lambda).sqrt();
            // rho_2 and psi_1 from the leading balance, written out independently
            let rho2 = (m * (2.0 * psi0).cos() - 2.0 * m_star * psi0.cos()) / (2.0 * lambda.sqrt());
            let psi1 = 1.0 / (4.0 * (m_star * psi0.cos() - m * (2.0 * psi0).cos()));
            worst = worst.max(((sol.rho_k(2) - rho2) / rho2).abs());
            worst = worst.max(((sol.psi_k(1) - psi1) / psi1).abs());
            cases += 1;
        }
    }
    verdict(
        3,
        "series closed forms",
        worst <= 1e-12,
        start.elapsed(),
        5.0,
        &format!("{points} parameter points, {cases} branches, worst relative error {worst:e}"),
    );
}

#[test]
fn criterion_04_residual_decay() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let slope = |order| {
        let sol = build_series(&unit(4.0), 1, order).unwrap();
        let pts: Vec<(f64, f64)> = logspace(1e2, 1e4, 9)
            .into_iter()
            .map(|tau| (tau, sol.residual(tau).0.abs()))
            .collect();
        loglog_slope(&pts)
    };
    let (k2, k4) = (slope(2), slope(4));
    verdict(
        4,
        "residual decay",
        (k2 + 1.5).abs() <= 0.3 && k4 < k2,
        start.elapsed(),
        10.0,
        &format!("K=2 slope {k2:.3} (target -1.5 +- 0.3), K=4 slope {k4:.3}"),
    );
}

#[test]
fn criterion_05_eigenvalue_convergence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let p = unit(4.0);
    let mut slopes = Vec::new();
    for branch in [1u8, 3] {
        let sol = build_series(&p, branch, 4).unwrap();
        let d = d0(&p, branch).unwrap();
        let limit = d.abs().sqrt();
        let (mut plus, mut minus) = (Vec::new(), Vec::new());
        for eta in logspace(1e3, 1e6, 13) {
            let (a, b) = jacobian(&sol, eta).eigen;
            // real pair for D0 > 0, imaginary pair otherwise
            let (a, b) = if d > 0.0 { (a.re, b.re) } else { (a.im, b.im) };
            plus.push((eta, (a - limit).abs()));
            minus.push((eta, (b + limit).abs()));
        }
        slopes.push((branch, loglog_slope(&plus), loglog_slope(&minus)));
    }
    let pass = slopes
        .iter()
        .all(|&(_, a, b)| (a + 0.4).abs() <= 0.15 && (b + 0.4).abs() <= 0.15);
    let detail = slopes
        .iter()
        .map(|(b, x, y)| format!("branch {b}: {x:.3} / {y:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(5, "eigenvalue convergence", pass, start.elapsed(), 10.0, &format!("{detail} (target -0.4 +- 0.15)"));
}

#[test]
fn criterion_06_pushforward_consistency() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let p = unit(4.0);
    let sols: Vec<_> = (1..=4).map(|b| build_series(&p, b, 4).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    let field = |rho: f64, psi: f64, tau: f64| reduced_rhs(&ReducedState::new(rho, psi, tau), &p, true).unwrap();
    for i in 0..1000 {
        let sol = &sols[i % 4];
        let eta = 10f64.powf(rng.gen_range(2.0..6.0));
        let radius = rng.gen_range(0.01..0.2);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let st = TransformedState::new(radius * angle.cos(), radius * angle.sin(), eta);
        let got = transformed_rhs(&st, sol).unwrap();

        // chain rule through tau = (5 eta / 4)^(4/5), s = tau^(1/4)
        let tau = (1.25 * eta).powf(0.8);
        let s = tau.powf(0.25);
        let (rs, ps) = sol.eval(tau);
        let (rho, psi) = (rs + st.r / s, ps + st.p);
        let (fr, fp) = field(rho, psi, tau);
        let (fr0, fp0) = field(rs, ps, tau);
        let want = ((fr - fr0) + st.r / (5.0 * eta), (fp - fp0) / s);

        let err = (got.0 - want.0).hypot(got.1 - want.1) / want.0.hypot(want.1);
        worst = worst.max(err);
        assert!((tau_of_eta(eta) - tau).abs() <= 1e-12 * tau);
    }
    verdict(
        6,
        "pushforward consistency",
        worst <= 1e-8,
        start.elapsed(),
        5.0,
        &format!("1000 states over four branches, worst relative error {worst:e}"),
    );
}

#[test]
fn criterion_07_lyapunov_bounds() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/lyapunov_domains.json");
    let frozen: Vec<FrozenDomain> = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let required = [(1u8, 4.0), (2, 4.0), (2, 0.0), (3, -4.0), (4, -4.0)];
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (branch, m) in required {
        let Some(f) = frozen.iter().find(|f| f.branch == branch && f.params == unit(m)) else {
            pass = false;
            lines.push(format!("b{branch} m={m}: no fixture"));
            continue;
        };
        let sol = build_series(&f.params, branch, 4).unwrap();
        let r = check_bounds(&sol, &f.domain(), 10_000, f.seed);
        pass &= r.bound_violations == 0 && r.derivative_violations == 0 && r.min_margin > 0.0;
        lines.push(format!("b{branch} m={m}: {}/{}", r.bound_violations, r.derivative_violations));
    }
    verdict(
        7,
        "Lyapunov bounds",
        pass,
        start.elapsed(),
        30.0,
        &format!("10^4 samples each, bound/derivative violations {}", lines.join(", ")),
    );
}

#[test]
fn criterion_08_asymptotic_attraction() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let p = unit(4.0);
    let sol = build_series(&p, 1, 4).unwrap();
    let (tau0, tau1) = (20.0, 500.0);
    let (rho_s, psi_s) = sol.eval(tau0);
    // norm 0.05 in (delta rho tau^(1/4), delta psi), split evenly between the two
    let c = 0.05 / 2f64.sqrt();
    let y0 = [rho_s + c / tau0.powf(0.25), psi_s + c];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), ModelError> {
        let (a, b) = reduced_rhs(&ReducedState::new(y[0], y[1], t), &p, true)?;
        dy[0] = a;
        dy[1] = b;
        Ok(())
    };
    let cfg = IntegratorConfig::default().with_tolerance(1e-11).with_sample_interval(0.05);
    let tr = integrate(&rhs, &y0, (tau0, tau1), &cfg, None).unwrap();
    let dev: Vec<(f64, f64)> = tr.samples.iter().map(|s| (s.t, (s.y[1] - sol.eval(s.t).1).abs())).collect();
    let ratio = dev.last().unwrap().1 / dev[0].1;

    // envelope: maxima over 20 log-spaced windows
    let edges = logspace(tau0, tau1, 21);
    let env: Vec<(f64, f64)> = edges
        .windows(2)
        .map(|w| {
            let top = dev
                .iter()
                .filter(|(t, _)| *t >= w[0] && *t < w[1])
                .map(|x| x.1)
                .fold(0.0, f64::max);
            ((w[0] * w[1]).sqrt(), top)
        })
        .collect();
    let exponent = -loglog_slope(&env);
    verdict(
        8,
        "asymptotic attraction",
        ratio < 0.2 && exponent > 0.0,
        start.elapsed(),
        10.0,
        &format!("|psi - psi_*| ratio at tau=500 {ratio:.3} (needs < 0.2), envelope decay exponent {exponent:.3}"),
    );
}

#[test]
fn criterion_09_slow_flow_presets() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let tmp = TempDir::new().unwrap();
    let start = Instant::now();
    let mut summary = Vec::new();
    let mut pass = true;
    for name in ["fig2a", "fig2b", "fig2c"] {
        autores(tmp.path(), &["preset", name]);
        let s = read_json(&tmp.path().join(format!("{name}.summary.json")));
        let ratio = s["growth_ratio"].as_f64().unwrap();
        let sup = s["sup_rho"].as_f64().unwrap();
        let psi = s["max_abs_psi"].as_f64().unwrap();
        if name == "fig2c" {
            pass &= sup <= 3.0;
            summary.push(format!("{name}: sup rho {sup:.3} (needs <= 3)"));
        } else {
            pass &= (0.8..=1.2).contains(&ratio) && psi <= 4.0 * std::f64::consts::PI;
            summary.push(format!("{name}: rho(50)/sqrt(50) {ratio:.3}, max|psi| {psi:.3}"));
        }
    }
    verdict(9, "slow-flow presets", pass, start.elapsed(), 10.0, &summary.join("; "));
}

#[test]
fn criterion_10_oscillator_presets_at_test_scale() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let tmp = TempDir::new().unwrap();
    let start = Instant::now();
    let expect = [("fig1a", true), ("fig1b", false), ("fig1c", true), ("fig1d", true)];
    let mut pass = true;
    let mut summary = Vec::new();
    for (name, locked) in expect {
        autores(tmp.path(), &["preset", name, "--eps=0.02"]);
        let s = read_json(&tmp.path().join(format!("{name}.summary.json")));
        let got = s["phase_locked"].as_bool().unwrap();
        pass &= got == locked;
        summary.push(format!("{name} {} locked={got}", s["mode"].as_str().unwrap()));
    }
    verdict(10, "oscillator presets at eps = 0.02", pass, start.elapsed(), 60.0, &summary.join(", "));
}

#[test]
fn criterion_11_regime_map_consistency() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut disagreements = Vec::new();
    let mut two_modes = 0;
    for _ in 0..50 {
        let p = OscillatorParams::new(
            10f64.powf(rng.gen_range(-4.0..-1.0)),
            10f64.powf(rng.gen_range(-6.0..-2.0)),
            rng.gen_range(0.05..1.0),
            rng.gen_range(0.1..3.0),
            rng.gen_range(-10.0..10.0),
        )
        .unwrap();
        let direct = match oscillator_regime(&p).unwrap() {
            OscillatorRegime::AntiPhaseOnly => vec![std::f64::consts::PI],
            OscillatorRegime::TwoStableModes { psi0 } => {
                two_modes += 1;
                vec![psi0.0, psi0.1]
            }
            OscillatorRegime::Degenerate => vec![],
        };
        let via: Vec<f64> = stable_phases(&reduce_params(&p).unwrap()).into_iter().map(|x| x.1).collect();
        let same = direct.len() == via.len() && direct.iter().zip(&via).all(|(a, b)| (a - b).abs() <= 1e-12);
        if !same {
            disagreements.push(format!("{p:?}: {direct:?} vs {via:?}"));
        }
    }
    verdict(
        11,
        "oscillator regime map",
        disagreements.is_empty(),
        start.elapsed(),
        1.0,
        &format!("50 draws ({two_modes} with two stable modes), disagreements {disagreements:?}"),
    );
}

#[test]
fn criterion_12_determinism() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let tmp = TempDir::new().unwrap();
    let start = Instant::now();
    let mut differing = Vec::new();
    let presets = ["fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c"];
    for name in presets {
        let (a, b) = (tmp.path().join(name).join("a"), tmp.path().join(name).join("b"));
        autores(&a, &["preset", name, "--workers=1"]);
        let manifest = a.join(format!("{name}.manifest.json"));
        autores(&b, &["replay", manifest.to_str().unwrap(), "--workers=4"]);
        let m = read_json(&manifest);
        let mut files: Vec<String> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        files.push(format!("{name}.manifest.json"));
        for f in files {
            if fs::read(a.join(&f)).ok() != fs::read(b.join(&f)).ok() {
                differing.push(f);
            }
        }
    }
    verdict(
        12,
        "replay determinism",
        differing.is_empty(),
        start.elapsed(),
        60.0,
        &format!("7 presets replayed with 1 vs 4 workers, differing files {differing:?}"),
    );
}
