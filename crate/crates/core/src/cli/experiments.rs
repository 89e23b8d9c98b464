//! Orchestration: turn a `RunConfig` into phase series, sweeps and figures.

use std::f64::consts::PI;

use crate::closedform::{dephasing_avg_phases, dissipative_avg_dyn_phase, dissipative_avg_total_phase};
use crate::control::{leo_phase_series, run_leo_experiment, LeoExperiment};
use crate::ensemble::{average_phase_series, EnsembleOptions, PhaseEnsemble};
use crate::error::{Error, Result};
use crate::geomphase::{PhaseOptions, PhaseSeries};
use crate::models::{build_model, ModelKind, ModelSpec, ObarCoeffs};
use crate::unwrap::nearest_sheet;
use crate::C64;

use super::config::{Axis, Mode, RunConfig};
use super::csv::{AnalyticColumns, SeriesRow, SweepCell, SweepTable};

pub fn build(cfg: &RunConfig) -> Result<ModelSpec> {
    cfg.validate()?;
    let kind = cfg.require_model()?;
    build_model(kind, cfg.omega, cfg.lambda, cfg.bath()?, cfg.theta, cfg.control(), cfg.grid()?)
}

pub fn ensemble_options(cfg: &RunConfig) -> EnsembleOptions {
    let mut o = EnsembleOptions::new(cfg.n_traj, cfg.seed);
    o.threads = cfg.threads;
    o
}

/// Closed-form (dissipative, dephasing) or deterministic (LEO) averaged
/// phases on the model grid.
pub fn analytic_series(model: &ModelSpec) -> Result<PhaseSeries> {
    let grid = model.grid;
    let (beta_tot, beta_dyn): (Vec<C64>, Vec<C64>) = match (&model.kind, &model.obar) {
        (ModelKind::Dissipative2L, ObarCoeffs::Dissipative(f)) => (
            dissipative_avg_total_phase(model.omega, model.lambda, model.theta, &grid, f)?,
            dissipative_avg_dyn_phase(model.omega, model.lambda, model.theta, &grid, f)?,
        ),
        (ModelKind::Dephasing2L, _) => grid
            .times()
            .map(|t| {
                let (tot, dyn_, _) = dephasing_avg_phases(model.omega, model.lambda, &model.bath, model.theta, t - grid.t0());
                (tot, dyn_)
            })
            .unzip(),
        (ModelKind::Leo3L, _) => return leo_phase_series(model, &PhaseOptions::default()),
        (kind, _) => return Err(Error::WrongModelKind { expected: "matching coefficients", found: kind.as_str() }),
    };
    let beta = beta_tot.iter().zip(&beta_dyn).map(|(a, b)| a - b).collect();
    Ok(PhaseSeries { grid, beta_tot, beta_dyn, beta, min_overlap_magnitude: f64::NAN })
}

fn rows_from_series(s: &PhaseSeries) -> Vec<SeriesRow> {
    (0..s.grid.len())
        .map(|k| SeriesRow { t: s.grid.t(k), beta_tot: s.beta_tot[k], beta_dyn: s.beta_dyn[k], beta: s.beta[k], stderr: 0.0 })
        .collect()
}

fn rows_from_ensemble(e: &PhaseEnsemble) -> Vec<SeriesRow> {
    (0..e.grid.len())
        .map(|k| SeriesRow {
            t: e.grid.t(k),
            beta_tot: e.beta_tot.mean[k],
            beta_dyn: e.beta_dyn.mean[k],
            beta: e.beta.mean[k],
            stderr: e.beta.stderr[k],
        })
        .collect()
}

/// `|a − b|` with the real parts compared on the nearest √-sheet.
pub fn sheet_residual(a: C64, b: C64) -> f64 {
    C64::new(nearest_sheet(a.re, b.re) - b.re, a.im - b.im).norm()
}

/// Output of a single `run`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<SeriesRow>,
    pub analytic: Option<Vec<AnalyticColumns>>,
    /// Trajectories excluded from the ensemble mean.
    pub excluded: usize,
}

impl RunOutput {
    /// Final-time residual over its standard error (both mode only).
    pub fn final_z(&self) -> Option<f64> {
        let a = self.analytic.as_ref()?.last()?;
        let r = self.rows.last()?;
        Some(a.residual / r.stderr.max(1e-8))
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let model = build(cfg)?;
    match cfg.mode {
        Mode::Analytic => Ok(RunOutput { rows: rows_from_series(&analytic_series(&model)?), analytic: None, excluded: 0 }),
        Mode::Mc => {
            let e = average_phase_series(&model, &ensemble_options(cfg))?;
            Ok(RunOutput { rows: rows_from_ensemble(&e), analytic: None, excluded: e.excluded.len() })
        }
        Mode::Both => {
            let e = average_phase_series(&model, &ensemble_options(cfg))?;
            let a = analytic_series(&model)?;
            let rows = rows_from_ensemble(&e);
            let cols = rows
                .iter()
                .enumerate()
                .map(|(k, r)| AnalyticColumns {
                    beta_tot: a.beta_tot[k],
                    beta_dyn: a.beta_dyn[k],
                    beta: a.beta[k],
                    residual: sheet_residual(r.beta, a.beta[k]),
                })
                .collect();
            Ok(RunOutput { rows, analytic: Some(cols), excluded: e.excluded.len() })
        }
    }
}

/// Geometric phase at the final time and its standard error.
pub fn final_phase(cfg: &RunConfig) -> Result<(C64, f64)> {
    let model = build(cfg)?;
    match cfg.mode {
        Mode::Analytic => Ok((analytic_series(&model)?.last().2, 0.0)),
        Mode::Mc => {
            let e = average_phase_series(&model, &ensemble_options(cfg))?;
            let n = e.grid.n_steps();
            Ok((e.beta.mean[n], e.beta.stderr[n]))
        }
        Mode::Both => Err(Error::Config { context: "mode".into(), message: "sweeps take mode mc or analytic".into() }),
    }
}

/// Evaluate the final-time phase over the configured axes, row-major.
pub fn sweep(cfg: &RunConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let x = cfg.x.as_ref().ok_or_else(|| Error::Config { context: "x".into(), message: "sweep needs an x axis".into() })?;
    let ys: Vec<Option<f64>> = match &cfg.y {
        Some(y) => y.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut cells = Vec::with_capacity(x.points * ys.len());
    for xv in x.values() {
        for &yv in &ys {
            let mut c = cfg.clone();
            c.set_param(&x.name, xv);
            if let (Some(y), Some(v)) = (&cfg.y, yv) {
                c.set_param(&y.name, v);
            }
            let (beta, stderr) = final_phase(&c)?;
            cells.push(SweepCell { x: xv, y: yv, beta, stderr });
        }
    }
    Ok(SweepTable { x_name: x.name.clone(), y_name: cfg.y.as_ref().map(|a| a.name.clone()), cells })
}

/// Figures the CLI can regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig1a" => Ok(Figure::Fig1a),
            "fig1b" => Ok(Figure::Fig1b),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            other => Err(format!("unknown figure `{other}` (expected fig1a, fig1b, fig2 or fig3)")),
        }
    }
}

impl Figure {
    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig1a => "fig1a",
            Figure::Fig1b => "fig1b",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }
}

/// Smallest default `γ` and `λ` on the figure axes.
pub const AXIS_MIN: f64 = 0.02;
pub const AXIS_MAX: f64 = 3.0;
pub const AXIS_POINTS: usize = 41;

fn axis(name: &str, min: f64, max: f64) -> Option<Axis> {
    Some(Axis { name: name.into(), min, max, points: AXIS_POINTS })
}

/// Base configuration of a figure, before file values and flags.
pub fn figure_defaults(fig: Figure) -> RunConfig {
    let mut c = RunConfig { mode: Mode::Analytic, ..RunConfig::default() };
    match fig {
        Figure::Fig1a => {
            c.model = Some(ModelKind::Dissipative2L);
            c.lambda = 1.0;
            c.x = axis("theta", 0.0, PI);
            c.y = axis("gamma", AXIS_MIN, AXIS_MAX);
        }
        Figure::Fig1b => {
            c.model = Some(ModelKind::Dissipative2L);
            c.gamma = 1.0;
            c.x = axis("theta", 0.0, PI);
            c.y = axis("lambda", AXIS_MIN, AXIS_MAX);
        }
        Figure::Fig2 => {
            c.model = Some(ModelKind::Dissipative2L);
            c.theta = 1.0;
            c.x = axis("lambda", AXIS_MIN, AXIS_MAX);
            c.y = axis("gamma", AXIS_MIN, AXIS_MAX);
        }
        Figure::Fig3 => {
            c.model = Some(ModelKind::Leo3L);
            c.gamma = 0.3;
            c.lambda = 1.0;
            c.theta = 1.2;
            c.c_x = 10.0;
            c.omega_c = 50.0;
        }
    }
    c
}

pub fn leo_experiment(cfg: &RunConfig) -> Result<LeoExperiment> {
    cfg.validate()?;
    let control = cfg.control().ok_or_else(|| Error::Config {
        context: "model".into(),
        message: "fig3 needs model = leo".into(),
    })?;
    run_leo_experiment(cfg.omega, cfg.lambda, cfg.bath()?, cfg.theta, control, cfg.grid()?, &PhaseOptions::default())
}

pub fn series_rows(s: &PhaseSeries) -> Vec<SeriesRow> {
    rows_from_series(s)
}

/// Qualitative checks on a figure sweep; returns human-readable failures.
pub fn check_sweep_figure(fig: Figure, table: &SweepTable) -> Vec<String> {
    let mut failures = Vec::new();
    let Some(first) = table.cells.first() else {
        return failures;
    };
    let (x_min, y_min) = (first.x, first.y.unwrap_or(f64::NAN));
    for c in &table.cells {
        let y = c.y.unwrap_or(f64::NAN);
        let on_small_edge = match fig {
            Figure::Fig1a | Figure::Fig1b => y == y_min,
            Figure::Fig2 => c.x == x_min || y == y_min,
            Figure::Fig3 => false,
        };
        if on_small_edge && c.beta.im.abs() >= 0.01 {
            failures.push(format!("|Im beta| = {:.4} >= 0.01 at ({}, {})", c.beta.im.abs(), c.x, y));
        }
        let pole = matches!(fig, Figure::Fig1a | Figure::Fig1b) && c.x == 0.0;
        if pole && c.beta.im.abs() > 3.0 * c.stderr.max(1e-9) {
            failures.push(format!("Im beta = {:e} at theta = 0 exceeds 3 stderr", c.beta.im));
        }
    }
    failures
}
