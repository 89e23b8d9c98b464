//! Acceptance criteria 1–7. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use geodec::bath::BathParams;
use geodec::cli::experiments::{check_sweep_figure, figure_defaults, sweep, Figure};
use geodec::closedform::{
    closed_system_phase, dissipative_avg_dyn_phase, dissipative_avg_total_phase, gamma_expansion_leading, markov_phase,
};
use geodec::control::run_leo_experiment;
use geodec::ensemble::{average_phase_series, mean_field_phase_series, EnsembleOptions};
use geodec::geomphase::PhaseOptions;
use geodec::models::{build_model, ControlField, ModelKind, ObarCoeffs};
use geodec::unwrap::distance_mod_pi;
use geodec::{TimeGrid, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `|a − b|` with real parts compared modulo π.
fn mod_pi(a: C64, b: C64) -> f64 {
    C64::new(distance_mod_pi(a.re, b.re), a.im - b.im).norm()
}

fn dissipative(gamma: f64, lambda: f64, theta: f64, t: f64, n: usize) -> geodec::models::ModelSpec {
    let grid = TimeGrid::span(t, n).unwrap();
    build_model(ModelKind::Dissipative2L, 1.0, lambda, BathParams::new(gamma, 1.0, 0.0).unwrap(), theta, None, grid).unwrap()
}

/// Geometric phase at the end of the noise-free (mean-field) pipeline.
fn pipeline_beta(gamma: f64, lambda: f64, theta: f64, t: f64, n: usize) -> C64 {
    mean_field_phase_series(&dissipative(gamma, lambda, theta, t, n), &PhaseOptions::default()).unwrap().last().2
}

fn criterion1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for theta in [0.4, 1.2, 2.0] {
        let start = Instant::now();
        let grid = TimeGrid::covering(TAU, 1e-3 * TAU).unwrap();
        let m = build_model(ModelKind::Dephasing2L, 1.0, 1.0, BathParams::default(), theta, None, grid).unwrap();
        let e = average_phase_series(&m, &EnsembleOptions::new(10_000, 1)).unwrap();
        let n = grid.n_steps();
        let (mean, se) = (e.beta.mean[n], e.beta.stderr[n]);
        let want = C64::new(PI * (1.0 + theta.cos()), 0.0);
        let dev = mod_pi(mean, want);
        let ok = dev <= 3.0 * se && mean.im.abs() <= 3.0 * se;
        pass &= ok;
        parts.push(format!(
            "theta={theta}: beta={:.6}{:+.6}i |dev|={dev:.2e} |Im|={:.2e} 3se={:.2e} ({:.1}s)",
            mean.re,
            mean.im,
            mean.im.abs(),
            3.0 * se,
            start.elapsed().as_secs_f64()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion2() -> Outcome {
    let m = dissipative(1.0, 1.0, 1.0, TAU, 1000);
    let e = average_phase_series(&m, &EnsembleOptions::new(10_000, 2)).unwrap();
    let ObarCoeffs::Dissipative(f) = &m.obar else { unreachable!() };
    let tot = dissipative_avg_total_phase(1.0, 1.0, 1.0, &m.grid, f).unwrap();
    let dyn_ = dissipative_avg_dyn_phase(1.0, 1.0, 1.0, &m.grid, f).unwrap();
    let n = m.grid.n_steps();
    let z_tot = mod_pi(e.beta_tot.mean[n], tot[n]) / e.beta_tot.stderr[n];
    let z_dyn = (e.beta_dyn.mean[n] - dyn_[n]).norm() / e.beta_dyn.stderr[n];
    outcome(
        z_tot <= 3.0 && z_dyn <= 3.0,
        format!(
            "beta_tot MC {:.6}{:+.6}i vs closed {:.6}{:+.6}i ({z_tot:.2} se); beta_dyn MC {:.6}{:+.6}i vs closed {:.6}{:+.6}i ({z_dyn:.2} se)",
            e.beta_tot.mean[n].re,
            e.beta_tot.mean[n].im,
            tot[n].re,
            tot[n].im,
            e.beta_dyn.mean[n].re,
            e.beta_dyn.mean[n].im,
            dyn_[n].re,
            dyn_[n].im
        ),
    )
}

fn criterion3() -> Outcome {
    let b = pipeline_beta(500.0, 1.0, 1.0, TAU, 20_000);
    let bm = markov_phase(1.0, 1.0).unwrap();
    let rel = mod_pi(b, bm) / bm.norm();
    outcome(rel <= 0.02, format!("pipeline {:.6}{:+.6}i, Markov {:.6}{:+.6}i, relative error {rel:.3e} (mod pi)", b.re, b.im, bm.re, bm.im))
}

/// Least-squares slope of `log|β(λ) − β(0)|` against `log λ`.
fn lambda_slope(t: f64) -> f64 {
    let b0 = closed_system_phase(1.0, 1.0, t);
    let pts: Vec<(f64, f64)> = (0..10)
        .map(|i| {
            let lam = 0.02 * 10f64.powf(i as f64 / 9.0);
            (lam.ln(), (pipeline_beta(1.0, lam, 1.0, t, 4000) - b0).norm().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

fn gamma_coefficient_error(t: f64) -> f64 {
    let g = 1e-3;
    let b = pipeline_beta(g, 0.5, 1.0, t, 4000);
    let coeff = gamma_expansion_leading(0.5, 1.0, t).unwrap();
    ((b - closed_system_phase(1.0, 1.0, t)) / g - coeff).norm() / coeff.norm()
}

fn criterion4() -> Outcome {
    let slope = lambda_slope(TAU);
    let gerr = gamma_coefficient_error(TAU);
    let pass = (slope - 2.0).abs() <= 0.1 && gerr <= 0.05;
    // Same fits at t = π, where neither expansion coefficient vanishes.
    let (slope_pi, gerr_pi) = (lambda_slope(PI), gamma_coefficient_error(PI));
    outcome(
        pass,
        format!(
            "t=2pi: slope {slope:.3} (want 2.0±0.1), O(gamma) relative error {gerr:.3e} (want ≤0.05); \
             supplementary t=pi: slope {slope_pi:.3}, O(gamma) relative error {gerr_pi:.3e}"
        ),
    )
}

fn criterion5() -> Outcome {
    let grid = TimeGrid::span(TAU, 20_000).unwrap();
    let exp = run_leo_experiment(
        1.0,
        1.0,
        BathParams::new(0.3, 1.0, 0.0).unwrap(),
        1.2,
        ControlField { c_x: 10.0, omega_c: 50.0 },
        grid,
        &PhaseOptions::default(),
    )
    .unwrap();
    let (sc, su) = (exp.sup_im_controlled(), exp.sup_im_uncontrolled());
    outcome(
        sc < 0.005 && su > 0.005,
        format!("sup|Im beta| controlled {sc:.4e}, uncontrolled {su:.4e}; sup|Re beta - target| {:.4}", exp.max_real_deviation()),
    )
}

fn criterion6() -> Outcome {
    let overlap = common::overlap_conservation(100);
    let one_form = common::one_form_consistency(20);
    let gauge = common::gauge_invariance(5);
    let noise = [BathParams::default(), BathParams::new(0.3, 2.0, 1.5).unwrap()]
        .iter()
        .map(|p| common::noise_covariance_z(p, 100_000))
        .fold(0.0, f64::max);
    let (geo, conn) = common::geodesic_checks();
    let trace = common::rho_tilde_trace();
    let threads = common::thread_determinism(&[1, 4, 16]);
    let pass = overlap <= 1e-8
        && one_form <= 1e-5
        && gauge <= 1e-6
        && noise < 4.0
        && geo <= 1e-4
        && conn <= 1e-4
        && trace <= 1e-10
        && threads;
    outcome(
        pass,
        format!(
            "overlap {overlap:.1e}, one-form {one_form:.1e}, gauge {gauge:.1e}, noise covariance {noise:.2} se, \
             geodesic residual {geo:.1e}, connection {conn:.1e}, trace {trace:.1e}, threads {{1,4,16}} identical: {threads}"
        ),
    )
}

fn criterion7() -> Outcome {
    let mut failures = Vec::new();
    let mut edge = Vec::new();
    for fig in [Figure::Fig1a, Figure::Fig1b, Figure::Fig2] {
        let table = sweep(&figure_defaults(fig)).unwrap();
        failures.extend(check_sweep_figure(fig, &table).into_iter().map(|f| format!("{}: {f}", fig.id())));
        let first = table.cells[0];
        let worst = table
            .cells
            .iter()
            .filter(|c| c.y == first.y || (fig == Figure::Fig2 && c.x == first.x))
            .map(|c| c.beta.im.abs())
            .fold(0.0, f64::max);
        edge.push(format!("{} edge max |Im| {worst:.2e}", fig.id()));
    }
    let mut cfg = figure_defaults(Figure::Fig1a);
    cfg.y = None;
    cfg.gamma = 1.0;
    let row = sweep(&cfg).unwrap();
    let signs: Vec<f64> = row.cells.iter().map(|c| c.beta.im).filter(|v| v.abs() > 1e-6).collect();
    let changes = signs.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    if changes == 0 {
        failures.push("no sign change of Im beta over theta at gamma = lambda = 1".into());
    }
    let range = row.cells.iter().map(|c| c.beta.im).fold((f64::MAX, f64::MIN), |a, v| (a.0.min(v), a.1.max(v)));
    outcome(
        failures.is_empty(),
        format!(
            "{}; theta row (gamma=lambda=1): {changes} sign change(s), Im beta in [{:.4}, {:.4}]{}",
            edge.join(", "),
            range.0,
            range.1,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 dephasing closed-system equality", criterion1),
        ("2 dissipative averaged phases", criterion2),
        ("3 Markov limit", criterion3),
        ("4 perturbative scaling", criterion4),
        ("5 LEO suppression", criterion5),
        ("6 structural suite", criterion6),
        ("7 figure 1/2 qualitative shape", criterion7),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {tag} [{:.1}s] {}", start.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
