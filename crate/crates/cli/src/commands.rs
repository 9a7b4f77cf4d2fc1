//! One function per subcommand. Each writes its files through an
//! [`OutputSet`] and returns the parameter record stored in the manifest.

use std::fmt::Write as _;

use autores_core::asymptotics::build_series;
use autores_core::integrate::{IntegrateError, Trajectory};
use autores_core::lyapunov::{check_bounds, search_domain, FrozenDomain, LyapunovDomain, SearchGrid};
use autores_core::model::{reduce_params, OscillatorParams, ReducedParams};
use autores_core::stability::{
    classify, critical_sweep_ratio, lyapunov_condition, oscillator_regime, stable_phases, sweep_ratio, Regime,
    StabilityVerdict,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AsymptoticsArgs, BasinArgs, ClassifyArgs, CrosscheckArgs, LyapunovArgs, PresetArgs, SimulateArgs, SlowSystem,
    System,
};
use crate::capture::{CaptureCriterion, CaptureStatus, PhaseLock};
use crate::error::{CliError, CliResult};
use crate::output::{
    write_json, OutputSet, BASIN_COLUMNS, CROSSCHECK_COLUMNS, OSCILLATOR_COLUMNS, REDUCED_COLUMNS, RESIDUAL_COLUMNS,
};
use crate::presets::{self, Mode, PresetSpec};
use crate::runs;

/// Settings shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Session {
    pub seed: u64,
    pub tol: f64,
}

/// What a command reports back for its manifest and the terminal.
#[derive(Debug, Default)]
pub struct Ran {
    pub params: Value,
    /// Seed actually used, when it differs from the session seed.
    pub seed: Option<u64>,
    pub stdout: String,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadInput(msg.into())
}

fn pair(v: &[f64], what: &str) -> CliResult<[f64; 2]> {
    match v {
        [a, b] => Ok([*a, *b]),
        _ => Err(bad(format!("{what} needs exactly two values"))),
    }
}

/// Writes whatever trajectory exists, then passes the integration result on.
fn keep_partial(
    res: Result<Trajectory, IntegrateError>,
    mut write: impl FnMut(&Trajectory) -> CliResult<()>,
) -> CliResult<Trajectory> {
    match res {
        Ok(tr) => {
            write(&tr)?;
            Ok(tr)
        }
        Err(e) => {
            if let Some(tr) = e.partial() {
                write(tr)?;
            }
            Err(e.into())
        }
    }
}

fn run_summary(tr: &Trajectory) -> Value {
    json!({
        "terminated_by": tr.meta.terminated_by,
        "accepted_steps": tr.meta.accepted_steps,
        "rejected_steps": tr.meta.rejected_steps,
        "final": tr.last(),
    })
}

pub fn simulate(a: &SimulateArgs, s: &Session, out: &mut OutputSet) -> CliResult<Ran> {
    let y0 = pair(&a.y0, "--y0")?;
    let [t0, t1] = pair(&a.span, "--span")?;
    let cfg = runs::config(s.tol, a.dt, 1.0);
    let (params, tr) = match a.system {
        System::Reduced0 | System::Reduced => {
            let p = a.reduced.params()?;
            let res = runs::integrate_slow(&p, a.system == System::Reduced, y0, (t0, t1), &cfg);
            let tr = keep_partial(res, |tr| out.csv("csv", &REDUCED_COLUMNS, runs::reduced_rows(tr)).map(drop))?;
            (serde_json::to_value(p), tr)
        }
        System::Oscillator => {
            let p = a.oscillator.params()?;
            let res = runs::integrate_oscillator(&p, y0, (t0, t1), &cfg, a.energy_guard);
            let tr = keep_partial(res, |tr| out.csv("csv", &OSCILLATOR_COLUMNS, runs::oscillator_rows(tr, &p, None)).map(drop))?;
            (serde_json::to_value(p), tr)
        }
    };
    out.json("summary.json", &run_summary(&tr))?;
    Ok(Ran {
        params: json!({
            "system": format!("{:?}", a.system).to_lowercase(),
            "model": params.expect("parameters serialize"),
            "y0": y0,
            "span": [t0, t1],
            "energy_guard": a.energy_guard,
            "integrator": cfg,
        }),
        ..Ran::default()
    })
}

fn log_grid(spec: &[f64]) -> CliResult<Vec<f64>> {
    let [lo, hi, n] = match spec {
        [a, b, c] => [*a, *b, *c],
        _ => return Err(bad("--tau-grid needs first,last,count")),
    };
    if !(lo > 0.0 && hi > lo && n >= 2.0 && n.fract() == 0.0) {
        return Err(bad("--tau-grid needs 0 < first < last and an integer count of at least 2"));
    }
    let n = n as usize;
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

pub fn asymptotics(a: &AsymptoticsArgs, out: &mut OutputSet) -> CliResult<Ran> {
    let p = a.reduced.params()?;
    let sol = build_series(&p, a.branch, a.order)?;
    let grid = log_grid(&a.tau_grid)?;
    out.json(
        "coefficients.json",
        &json!({
            "solution": sol,
            "rho2_closed_form": sol.rho2_closed_form(),
            "psi1_closed_form": sol.psi1_closed_form(),
        }),
    )?;
    out.csv(
        "residuals.csv",
        &RESIDUAL_COLUMNS,
        grid.iter().map(|&tau| {
            let (rho, psi) = sol.eval(tau);
            let (r0, r1) = sol.residual(tau);
            (tau, rho, psi, r0, r1)
        }),
    )?;
    Ok(Ran {
        params: json!({"model": p, "branch": a.branch, "order": a.order, "tau_grid": grid}),
        stdout: format!("branch {} psi0 = {} rho_2 = {}\n", a.branch, sol.psi0, sol.rho_k(2.min(a.order))),
        ..Ran::default()
    })
}

fn regime_label(v: &StabilityVerdict) -> &'static str {
    match v.regime {
        Regime::Stable => "stable",
        Regime::Unstable => "unstable",
        Regime::Degenerate => "degenerate",
        Regime::NotPresent => "-",
        Regime::Inconclusive => "inconclusive",
    }
}

fn table_line(label: &str, m: f64, verdicts: &[StabilityVerdict]) -> String {
    let mut line = format!("{label:>8} {m:>10.4}");
    for v in verdicts {
        let _ = write!(line, " {:>13}", regime_label(v));
    }
    line.push('\n');
    line
}

const TABLE_HEADER: &str = "  m/m_*          m      branch 1      branch 2      branch 3      branch 4\n";

#[derive(Serialize)]
struct ClassifyRow {
    m_ratio: Option<f64>,
    params: ReducedParams,
    verdicts: Vec<StabilityVerdict>,
    stable_phases: Vec<(u8, f64)>,
}

pub fn classify_cmd(a: &ClassifyArgs, out: &mut OutputSet) -> CliResult<Ran> {
    if a.oscillator {
        let p = a.osc.params()?;
        let regime = oscillator_regime(&p)?;
        let reduced = reduce_params(&p)?;
        let verdicts = classify(&reduced);
        let record = json!({
            "oscillator": p,
            "reduced": reduced,
            "mu": sweep_ratio(&p),
            "mu0": critical_sweep_ratio(&p),
            "regime": regime,
            "verdicts": verdicts,
        });
        out.json("json", &record)?;
        let mut text = TABLE_HEADER.to_string();
        text += &table_line(&format!("{:.4}", reduced.pumping_ratio()), reduced.m, &verdicts);
        let _ = writeln!(text, "oscillator regime: {regime:?}");
        return Ok(Ran {
            params: json!({"oscillator": p}),
            stdout: text,
            ..Ran::default()
        });
    }

    let base = a.reduced.params()?;
    let cases: Vec<(Option<f64>, ReducedParams)> = if a.m_ratios.is_empty() {
        vec![(None, base)]
    } else {
        a.m_ratios
            .iter()
            .map(|&r| Ok((Some(r), ReducedParams::new(base.lambda, base.f, r * base.m_star())?)))
            .collect::<CliResult<_>>()?
    };
    let rows: Vec<ClassifyRow> = cases
        .par_iter()
        .map(|&(m_ratio, params)| ClassifyRow {
            m_ratio,
            params,
            verdicts: classify(&params),
            stable_phases: stable_phases(&params),
        })
        .collect();
    out.json("json", &rows)?;
    let mut text = TABLE_HEADER.to_string();
    for r in &rows {
        let label = format!("{:.4}", r.m_ratio.unwrap_or(r.params.pumping_ratio()));
        text += &table_line(&label, r.params.m, &r.verdicts);
    }
    Ok(Ran {
        params: json!({"model": base, "m_ratios": a.m_ratios}),
        stdout: text,
        ..Ran::default()
    })
}

fn load_fixtures(a: &LyapunovArgs) -> CliResult<Vec<FrozenDomain>> {
    match std::fs::read_to_string(&a.fixtures) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", a.fixtures.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && a.search => Ok(Vec::new()),
        Err(e) => Err(CliError::io(&a.fixtures, e)),
    }
}

pub fn lyapunov(a: &LyapunovArgs, s: &Session, out: &mut OutputSet) -> CliResult<Ran> {
    let p = a.reduced.params()?;
    let sol = build_series(&p, a.branch, a.order)?;
    let applicable = lyapunov_condition(&p, a.branch);
    let (domain, seed, source) = if a.fixture {
        let frozen = load_fixtures(a)?
            .into_iter()
            .find(|f| f.branch == a.branch && f.params == p)
            .ok_or_else(|| bad(format!("no stored domain for branch {} with {p:?}", a.branch)))?;
        (frozen.domain(), frozen.seed, "fixture")
    } else if a.search && applicable {
        let grid = SearchGrid {
            eta_stars: (2..=a.search_max_exponent).map(|k| 10f64.powi(k)).collect(),
            eps1: a.eps1,
            eps2: a.eps2,
            ..SearchGrid::default()
        };
        let found = search_domain(&sol, &grid, a.samples, s.seed)
            .ok_or_else(|| CliError::Numerical(format!("no passing domain on the search grid for branch {}", a.branch)))?;
        let mut all = load_fixtures(a)?;
        all.retain(|f| !(f.branch == found.branch && f.params == found.params));
        all.push(found.clone());
        write_json(&a.fixtures, &all)?;
        out.json("domain.json", &found)?;
        (found.domain(), s.seed, "search")
    } else {
        (LyapunovDomain::new(a.d_star, a.eta_star, a.eps1, a.eps2)?, s.seed, "flags")
    };
    let report = check_bounds(&sol, &domain, a.samples, seed);
    out.json("json", &report)?;
    let stdout = format!(
        "branch {} applicable={} bound_violations={} derivative_violations={} min_margin={:e}\n",
        report.branch, report.applicable, report.bound_violations, report.derivative_violations, report.min_margin
    );
    Ok(Ran {
        params: json!({
            "model": p,
            "branch": a.branch,
            "order": a.order,
            "domain": domain,
            "domain_source": source,
            "samples": a.samples,
        }),
        seed: Some(seed),
        stdout,
    })
}

fn axis(values: &[f64], range: &[f64], what: &str) -> CliResult<Vec<f64>> {
    if !values.is_empty() {
        return Ok(values.to_vec());
    }
    match range {
        [lo, hi, n] if *n >= 1.0 && n.fract() == 0.0 => {
            let n = *n as usize;
            if n == 1 {
                return Ok(vec![*lo]);
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
        }
        [] => Err(bad(format!("the {what} grid is empty"))),
        _ => Err(bad(format!("--{what}-range needs first,last,count with an integer count"))),
    }
}

#[derive(Serialize)]
struct BasinRow {
    index: usize,
    rho0: f64,
    psi0: f64,
    status: CaptureStatus,
    rho_final: f64,
    psi_final: f64,
}

pub fn basin(a: &BasinArgs, s: &Session, out: &mut OutputSet) -> CliResult<Ran> {
    let p = a.reduced.params()?;
    let criterion = CaptureCriterion {
        horizon_tau: a.horizon,
        ratio_threshold: a.threshold,
    };
    criterion.validate().map_err(bad)?;
    let rho = axis(&a.rho, &a.rho_range, "rho")?;
    let psi = axis(&a.psi, &a.psi_range, "psi")?;
    let cells: Vec<(f64, f64)> = if a.zip {
        if rho.len() != psi.len() {
            return Err(bad("--zip needs as many amplitudes as phases"));
        }
        rho.iter().copied().zip(psi.iter().copied()).collect()
    } else {
        rho.iter().flat_map(|&r| psi.iter().map(move |&q| (r, q))).collect()
    };
    let cfg = runs::config(s.tol, a.dt, 1.0);
    cfg.validate((0.0, a.horizon))?;
    let parametric = a.system == SlowSystem::Reduced;
    let rows: Vec<BasinRow> = cells
        .par_iter()
        .enumerate()
        .map(|(index, &(rho0, psi0))| {
            let (status, last) = match runs::integrate_slow(&p, parametric, [rho0, psi0], (0.0, a.horizon), &cfg) {
                Ok(tr) => (criterion.evaluate(&tr, p.lambda), Some(tr.last().y.clone())),
                Err(e) => (CaptureStatus::Failed, e.partial().map(|tr| tr.last().y.clone())),
            };
            let last = last.unwrap_or_else(|| vec![f64::NAN, f64::NAN]);
            BasinRow {
                index,
                rho0,
                psi0,
                status,
                rho_final: last[0],
                psi_final: last[1],
            }
        })
        .collect();
    out.csv("csv", &BASIN_COLUMNS, &rows)?;
    let count = |st| rows.iter().filter(|r| r.status == st).count();
    let stdout = format!(
        "{} cells: {} captured, {} not captured, {} failed\n",
        rows.len(),
        count(CaptureStatus::Captured),
        count(CaptureStatus::NotCaptured),
        count(CaptureStatus::Failed)
    );
    Ok(Ran {
        params: json!({
            "model": p,
            "system": format!("{:?}", a.system).to_lowercase(),
            "criterion": criterion,
            "cells": cells,
            "integrator": cfg,
        }),
        stdout,
        ..Ran::default()
    })
}

/// Envelope comparison between an oscillator run and the slow flow started
/// from the same amplitude and phase.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckSummary {
    pub tau_window: [f64; 2],
    pub amplitude_factor: f64,
    pub maxima: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Largest `|Delta - psi|` once the transient fraction of the window has passed.
    pub max_phase_error: f64,
    pub phase_locked: bool,
    pub terminated_by: autores_core::integrate::Termination,
}

pub fn crosscheck(a: &CrosscheckArgs, s: &Session, out: &mut OutputSet) -> CliResult<Ran> {
    let p = a.osc.params()?;
    let reduced = reduce_params(&p)?;
    if !(a.tau0 > 0.0 && a.tau_end > a.tau0) {
        return Err(bad("need 0 < tau0 < tau-end"));
    }
    let rho0 = a.rho0.unwrap_or_else(|| (reduced.lambda * a.tau0).sqrt());
    let k = p.slow_scale();
    let t0 = a.tau0 / k;
    let start = p.state_from_slow(rho0, a.psi0, t0);
    let cfg = runs::config(s.tol, a.dt, 1.0);
    let osc = runs::integrate_oscillator(&p, [start.u, start.v], (t0, a.tau_end / k), &cfg, Some(a.guard))?;
    let tau_last = osc.last().t * k;
    let window = tau_last - a.tau0;
    if window <= 0.0 {
        return Err(CliError::Numerical("oscillator left the capture window immediately".into()));
    }
    let slow_cfg = runs::config(s.tol, (window / 100.0).min(1e-3), 0.1);
    let slow = runs::integrate_slow(&reduced, true, [rho0, a.psi0], (a.tau0, tau_last), &slow_cfg)?;

    let mut delta = runs::phase_track(&osc, &p);
    runs::anchor_phases(&mut delta, a.psi0);

    let factor = p.amplitude_factor();
    let settled = a.tau0 + a.transient * window;
    let samples = &osc.samples;
    let mut rows = Vec::new();
    let mut phase_err: f64 = 0.0;
    for i in 1..samples.len().saturating_sub(1) {
        let here = samples[i].y[0].abs();
        if !(here >= samples[i - 1].y[0].abs() && here > samples[i + 1].y[0].abs()) {
            continue;
        }
        let t = samples[i].t;
        let tau = t * k;
        let predicted = factor * runs::interpolate(&slow, 0, tau);
        let psi = runs::interpolate(&slow, 1, tau);
        let rel = (here - predicted).abs() / predicted;
        if tau >= settled {
            phase_err = phase_err.max((delta[i] - psi).abs());
        }
        rows.push((t, tau, here, predicted, rel, delta[i], psi));
    }
    if rows.is_empty() {
        return Err(CliError::Numerical("no envelope maxima inside the capture window".into()));
    }
    let summary = CrosscheckSummary {
        tau_window: [a.tau0, tau_last],
        amplitude_factor: factor,
        maxima: rows.len(),
        max_rel_error: rows.iter().map(|r| r.4).fold(0.0, f64::max),
        mean_rel_error: rows.iter().map(|r| r.4).sum::<f64>() / rows.len() as f64,
        max_phase_error: phase_err,
        phase_locked: PhaseLock::around(a.psi0).holds(&delta),
        terminated_by: osc.meta.terminated_by,
    };
    out.csv("csv", &CROSSCHECK_COLUMNS, &rows)?;
    out.json("summary.json", &summary)?;
    let stdout = format!(
        "window tau in [{:.3}, {:.3}], {} maxima, max relative envelope error {:.4}, max phase error {:.4}\n",
        a.tau0, tau_last, summary.maxima, summary.max_rel_error, summary.max_phase_error
    );
    Ok(Ran {
        params: json!({
            "oscillator": p,
            "reduced": reduced,
            "tau0": a.tau0,
            "rho0": rho0,
            "psi0": a.psi0,
            "tau_end": a.tau_end,
            "guard": a.guard,
            "transient": a.transient,
            "integrator": cfg,
        }),
        stdout,
        ..Ran::default()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SlowPresetSummary {
    pub capture: CaptureStatus,
    pub criterion: CaptureCriterion,
    pub growth_ratio: f64,
    pub sup_rho: f64,
    pub max_abs_psi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscillatorPresetSummary {
    pub mode: Mode,
    pub lock: PhaseLock,
    pub phase_locked: bool,
    pub max_phase_deviation: f64,
    pub delta_range: [f64; 2],
    pub reached_guard: bool,
    pub tau_final: f64,
    pub energy_final: f64,
    pub reduced: ReducedParams,
    pub regime: autores_core::stability::OscillatorRegime,
}

fn oscillator_preset(p: &OscillatorParams, mode: Mode, tau0: f64, tau_end: f64, dt: f64, guard: f64, s: &Session, out: &mut OutputSet) -> CliResult<()> {
    let reduced = reduce_params(p)?;
    let k = p.slow_scale();
    let start = p.state_from_slow((reduced.lambda * tau0).sqrt(), mode.target(), tau0 / k);
    let cfg = runs::config(s.tol, dt, 1.0);
    let res = runs::integrate_oscillator(p, [start.u, start.v], (start.t, tau_end / k), &cfg, Some(guard));
    let mut rows = Vec::new();
    let tr = keep_partial(res, |tr| {
        rows = runs::oscillator_rows(tr, p, Some(mode.target()));
        out.csv("csv", &OSCILLATOR_COLUMNS, &rows).map(drop)
    })?;
    let delta: Vec<f64> = rows.iter().map(|r| r.4).collect();
    let lock = PhaseLock::around(mode.target());
    let last = rows.last().expect("trajectory has samples");
    let summary = OscillatorPresetSummary {
        mode,
        lock,
        phase_locked: lock.holds(&delta),
        max_phase_deviation: lock.max_deviation(&delta),
        delta_range: [
            delta.iter().copied().fold(f64::INFINITY, f64::min),
            delta.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ],
        reached_guard: tr.meta.terminated_by == autores_core::integrate::Termination::Guard,
        tau_final: last.0 * k,
        energy_final: last.3,
        reduced,
        regime: oscillator_regime(p)?,
    };
    out.json("summary.json", &summary)?;
    Ok(())
}

pub fn preset(a: &PresetArgs, s: &Session, out: &mut OutputSet) -> CliResult<Ran> {
    let spec = presets::resolve(a.name, a.eps, a.tau_end, a.dt)?;
    match spec {
        PresetSpec::Slow { params, y0, horizon, dt } => {
            let cfg = runs::config(s.tol, dt, 1.0);
            let res = runs::integrate_slow(&params, true, y0, (0.0, horizon), &cfg);
            let tr = keep_partial(res, |tr| out.csv("csv", &REDUCED_COLUMNS, runs::reduced_rows(tr)).map(drop))?;
            let criterion = CaptureCriterion {
                horizon_tau: horizon,
                ..CaptureCriterion::default()
            };
            let summary = SlowPresetSummary {
                capture: criterion.evaluate(&tr, params.lambda),
                criterion,
                growth_ratio: criterion.growth_ratio(&tr, params.lambda),
                sup_rho: tr.component(0).fold(0.0, f64::max),
                max_abs_psi: tr.component(1).fold(0.0, |m, v| m.max(v.abs())),
            };
            out.json("summary.json", &summary)?;
        }
        PresetSpec::Oscillator {
            params,
            mode,
            tau0,
            tau_end,
            dt,
            guard,
        } => oscillator_preset(&params, mode, tau0, tau_end, dt, guard, s, out)?,
    }
    Ok(Ran {
        params: json!({"preset": a.name.as_str(), "spec": spec}),
        stdout: String::new(),
        ..Ran::default()
    })
}
