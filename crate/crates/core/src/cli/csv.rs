//! CSV emission: fixed schemas, 12 significant digits, LF line endings.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::C64;

pub const SERIES_HEADER: &str = "t,beta_tot_re,beta_tot_im,beta_dyn_re,beta_dyn_im,beta_re,beta_im,stderr";

/// Extra columns appended by `--mode both`.
pub const ANALYTIC_COLUMNS: &str =
    "analytic_beta_tot_re,analytic_beta_tot_im,analytic_beta_dyn_re,analytic_beta_dyn_im,analytic_beta_re,analytic_beta_im,residual";

/// Format with 12 significant digits, trimming trailing zeros.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new digit (9.99… → 10.0); that only
        // adds a trailing zero, which is trimmed below.
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{v:.11e}");
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

/// One row of a phase time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub beta_tot: C64,
    pub beta_dyn: C64,
    pub beta: C64,
    pub stderr: f64,
}

/// Analytic columns and residual for `--mode both`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticColumns {
    pub beta_tot: C64,
    pub beta_dyn: C64,
    pub beta: C64,
    pub residual: f64,
}

fn push_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_num(*v));
    }
    out.push('\n');
}

fn series_values(r: &SeriesRow) -> [f64; 8] {
    [r.t, r.beta_tot.re, r.beta_tot.im, r.beta_dyn.re, r.beta_dyn.im, r.beta.re, r.beta.im, r.stderr]
}

/// Time series in ascending `t`. With `analytic` the `--mode both` columns
/// are appended.
pub fn series_csv(rows: &[SeriesRow], analytic: Option<&[AnalyticColumns]>) -> String {
    let mut out = String::from(SERIES_HEADER);
    if analytic.is_some() {
        out.push(',');
        out.push_str(ANALYTIC_COLUMNS);
    }
    out.push('\n');
    for (k, r) in rows.iter().enumerate() {
        let mut vals = series_values(r).to_vec();
        if let Some(a) = analytic {
            let a = &a[k];
            vals.extend([a.beta_tot.re, a.beta_tot.im, a.beta_dyn.re, a.beta_dyn.im, a.beta.re, a.beta.im, a.residual]);
        }
        push_row(&mut out, &vals);
    }
    out
}

/// One cell of a sweep; `y` is absent for single-axis sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub x: f64,
    pub y: Option<f64>,
    pub beta: C64,
    pub stderr: f64,
}

/// Sweep table, row-major over `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub x_name: String,
    pub y_name: Option<String>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = match &self.y_name {
            Some(y) => writeln!(out, "{},{y},beta_im,beta_re,stderr", self.x_name),
            None => writeln!(out, "{},beta_im,beta_re,stderr", self.x_name),
        };
        for c in &self.cells {
            let mut vals = vec![c.x];
            vals.extend(c.y);
            vals.extend([c.beta.im, c.beta.re, c.stderr]);
            push_row(&mut out, &vals);
        }
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
