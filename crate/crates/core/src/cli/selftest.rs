//! Closed-form oracle suite behind `geodec selftest`.

use std::f64::consts::{PI, TAU};

use crate::bath::BathParams;
use crate::closedform::{
    closed_system_phase, dephasing_avg_phases, gamma_expansion_leading, lambda_expansion_phase, markov_phase,
};
use crate::ensemble::mean_field_phase_series;
use crate::error::Result;
use crate::geomphase::PhaseOptions;
use crate::grid::TimeGrid;
use crate::models::{build_model, ControlField, ModelKind};
use crate::unwrap::distance_mod_pi;
use crate::C64;

use super::experiments::analytic_series;

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured <= self.bound
    }

    pub fn line(&self) -> String {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        format!("{tag} {}: measured {:.3e}, bound {:.1e}", self.name, self.measured, self.bound)
    }
}

/// `|a − b|` with real parts compared modulo π.
fn mod_pi_error(a: C64, b: C64) -> f64 {
    C64::new(distance_mod_pi(a.re, b.re), a.im - b.im).norm()
}

fn geometric_end(kind: ModelKind, gamma: f64, lambda: f64, theta: f64, t: f64, n: usize) -> Result<C64> {
    let grid = TimeGrid::span(t, n)?;
    let control = (kind == ModelKind::Leo3L).then_some(ControlField::OFF);
    let m = build_model(kind, 1.0, lambda, BathParams::new(gamma, 1.0, 0.0)?, theta, control, grid)?;
    Ok(analytic_series(&m)?.last().2)
}

/// Run every oracle comparison.
pub fn run_selftest() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let err = [0.4, 1.2, 2.0]
        .iter()
        .map(|&th| mod_pi_error(closed_system_phase(1.0, th, TAU), C64::new(PI * (1.0 + th.cos()), 0.0)))
        .fold(0.0, f64::max);
    checks.push(Check { name: "closed-system phase equals pi(1+cos theta) modulo pi", measured: err, bound: 1e-12 });

    let bath = BathParams::new(1.0, 1.0, 0.0)?;
    let (_, _, geo) = dephasing_avg_phases(1.0, 1.0, &bath, 1.2, TAU);
    checks.push(Check {
        name: "dephasing geometric phase is decoherence-free",
        measured: (geo - closed_system_phase(1.0, 1.2, TAU)).norm(),
        bound: 1e-12,
    });

    let grid = TimeGrid::span(TAU, 1000)?;
    let m = build_model(ModelKind::Dissipative2L, 1.0, 1.0, bath, 1.0, None, grid)?;
    let mf = mean_field_phase_series(&m, &PhaseOptions::default())?;
    let cf = analytic_series(&m)?;
    let n = grid.n_steps();
    checks.push(Check {
        name: "dissipative noise-free pipeline matches closed form",
        measured: (mf.beta_tot[n] - cf.beta_tot[n]).norm().max((mf.beta_dyn[n] - cf.beta_dyn[n]).norm()),
        bound: 1e-6,
    });

    let b = geometric_end(ModelKind::Dissipative2L, 500.0, 1.0, 1.0, TAU, 40_000)?;
    let bm = markov_phase(1.0, 1.0)?;
    checks.push(Check { name: "large-gamma limit approaches the Markov phase", measured: mod_pi_error(b, bm) / bm.norm(), bound: 0.02 });

    // Second order in λ is checked at t = π, where the λ² coefficient is
    // non-degenerate; the remainder is O(λ⁴).
    let lam = 0.05;
    let b = geometric_end(ModelKind::Dissipative2L, 1.0, lam, 1.0, PI, 2000)?;
    let be = lambda_expansion_phase(1.0, 1.0, PI, lam)?;
    let b0 = closed_system_phase(1.0, 1.0, PI);
    checks.push(Check { name: "small-lambda expansion", measured: (b - be).norm() / (be - b0).norm(), bound: 0.05 });

    let g = 1e-3;
    let b = geometric_end(ModelKind::Dissipative2L, g, 0.5, 1.0, PI, 2000)?;
    let coeff = gamma_expansion_leading(0.5, 1.0, PI)?;
    checks.push(Check { name: "small-gamma leading coefficient", measured: ((b - b0) / g - coeff).norm() / coeff.norm(), bound: 0.05 });

    let b = geometric_end(ModelKind::Leo3L, 0.3, 0.0, 1.2, TAU, 4000)?;
    checks.push(Check {
        name: "uncoupled three-level model reduces to the qubit",
        measured: (b - closed_system_phase(1.0, 1.2, TAU)).norm(),
        bound: 1e-9,
    });

    Ok(checks)
}
