//! Closed-form phases used as independent oracles.
//!
//! All logarithms and arguments are made continuous in `t` with the same
//! unwrapping utility the trajectory pipeline uses, so both sides agree on
//! the branch of `√`.

use std::f64::consts::PI;

use crate::bath::{kernel_double_integral, BathParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{c, I};
use crate::unwrap::ArgUnwrapper;
use crate::C64;

/// Smallest magnitude accepted inside a logarithm or as a denominator.
pub const LOG_GUARD: f64 = 1e-12;

/// Continuous argument of `cos u − i·C·sin u`, starting at 0 for `u = 0`.
///
/// For `C = 0` the curve passes through the origin at `u = π/2`; the value
/// taken is the limit `C → 0⁺`.
pub fn closed_arg(cos_theta: f64, u: f64) -> f64 {
    let s = if cos_theta >= 0.0 { 1.0 } else { -1.0 };
    // the continuous argument of cos u + i|C| sin u stays within π/2 of u
    let a = (cos_theta.abs() * u.sin()).atan2(u.cos());
    let phi = a + 2.0 * PI * ((u - a) / (2.0 * PI)).round();
    -s * phi
}

/// Geometric phase of the closed two-level system,
/// `(ωt/2)cosθ + arg(cos(ωt/2) − i cosθ sin(ωt/2))`.
pub fn closed_system_phase(omega: f64, theta: f64, t: f64) -> C64 {
    let u = 0.5 * omega * t;
    c(u * theta.cos() + closed_arg(theta.cos(), u))
}

/// Averaged `(β_tot, β_dyn, β)` of the pure-dephasing model.
pub fn dephasing_avg_phases(omega: f64, lambda: f64, bath: &BathParams, theta: f64, t: f64) -> (C64, C64, C64) {
    let u = 0.5 * omega * t;
    let cs = theta.cos();
    let damp = I * (lambda * lambda) * kernel_double_integral(bath, t);
    let tot = damp + closed_arg(cs, u);
    let dyn_ = damp - u * cs;
    (tot, dyn_, tot - dyn_)
}

/// Running `∫₀ᵗ f` on the full grid for `f` tabulated on the half-step grid
/// (composite Simpson per step).
pub fn half_grid_integral(f: &[C64], grid: &TimeGrid) -> Vec<C64> {
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = c(0.0);
    out.push(acc);
    for k in 0..grid.n_steps() {
        acc += dt / 6.0 * (f[2 * k] + 4.0 * f[2 * k + 1] + f[2 * k + 2]);
        out.push(acc);
    }
    out
}

fn check_series(f: &[C64], grid: &TimeGrid) -> Result<()> {
    if f.len() != grid.half_len() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Averaged total phase of the dissipative model on the full grid:
/// `−(i/2)·log[g(g(1+C) − (C−1)e^{iωt}) / (−g(C−1) + (1+C)e^{iωt})]`
/// with `g = exp(−λ∫F)`.
pub fn dissipative_avg_total_phase(
    omega: f64,
    lambda: f64,
    theta: f64,
    grid: &TimeGrid,
    f: &[C64],
) -> Result<Vec<C64>> {
    check_series(f, grid)?;
    let cs = theta.cos();
    let int_f = half_grid_integral(f, grid);
    let ratio = |k: usize| -> Result<C64> {
        let t = grid.t(k) - grid.t0();
        let g = (-lambda * int_f[k]).exp();
        let e = C64::from_polar(1.0, omega * t);
        let num = g * (g * (1.0 + cs) - (cs - 1.0) * e);
        let den = -g * (cs - 1.0) + (1.0 + cs) * e;
        if num.norm() < LOG_GUARD || den.norm() < LOG_GUARD {
            return Err(Error::Domain {
                formula: "dissipative averaged total phase",
                reason: format!("log argument degenerate at t = {}", grid.t(k)),
            });
        }
        Ok(num / den)
    };
    let r0 = ratio(0)?;
    let mut unwrapper = ArgUnwrapper::new(r0, 0.0, PI);
    let mut out = Vec::with_capacity(grid.len());
    out.push(C64::new(0.0, -0.5 * r0.norm().ln()));
    for k in 1..grid.len() {
        let r = ratio(k)?;
        let arg = unwrapper.push(r, grid.t(k))?;
        out.push(C64::new(0.5 * arg, -0.5 * r.norm().ln()));
    }
    Ok(out)
}

/// Averaged dynamical phase of the dissipative model on the full grid:
/// `−∫₀ᵗ[(ω/2)cosθ − (iλF/2)(cosθ + 1)]ds`.
pub fn dissipative_avg_dyn_phase(omega: f64, lambda: f64, theta: f64, grid: &TimeGrid, f: &[C64]) -> Result<Vec<C64>> {
    check_series(f, grid)?;
    let cs = theta.cos();
    let int_f = half_grid_integral(f, grid);
    Ok((0..grid.len())
        .map(|k| {
            let t = grid.t(k) - grid.t0();
            -(0.5 * omega * cs * t) + 0.5 * I * lambda * (cs + 1.0) * int_f[k]
        })
        .collect())
}

/// Markov-limit geometric phase at `t = 2π/ω`.
pub fn markov_phase(lambda: f64, theta: f64) -> Result<C64> {
    let cs = theta.cos();
    let x = cs * (0.5 * PI * lambda * lambda).tanh();
    if !(x.abs() < 1.0 - 1e-15) {
        return Err(Error::Domain { formula: "Markov phase", reason: format!("atanh argument {x} outside (-1, 1)") });
    }
    let atanh = 0.5 * ((1.0 + x) / (1.0 - x)).ln();
    let bracket = -2.0 * atanh + PI * cs * C64::new(lambda * lambda, 2.0);
    Ok(PI - 0.5 * I * bracket)
}

/// Geometric phase to second order in `λ` (units `ω = 1`, `ω₀ = 0`).
pub fn lambda_expansion_phase(gamma: f64, theta: f64, t: f64, lambda: f64) -> Result<C64> {
    let cs = theta.cos();
    let (sh, ch) = ((0.5 * t).sin(), (0.5 * t).cos());
    let den = cs * cs * sh * sh + ch * ch;
    if den < LOG_GUARD {
        return Err(Error::Domain { formula: "lambda expansion", reason: format!("denominator {den:e} at t = {t}") });
    }
    let s2 = (0.5 * theta).sin().powi(2);
    let gi = C64::new(gamma, -1.0);
    let em1 = C64::from_polar(1.0, t) - 1.0;
    let tail = 1.0 + (gi * t).exp() * (gi * t - 1.0);
    let coeff = -I * gamma * em1 * em1 * s2 * cs * (cs + 1.0) * (-gamma * t).exp() / (8.0 * gi * gi * den) * tail;
    Ok(closed_system_phase(1.0, theta, t) + coeff * (lambda * lambda))
}

/// Coefficient of `γ` in the small-`γ` expansion of the geometric phase
/// (units `ω = 1`, `ω₀ = 0`); multiply by `γ` for the first-order term.
pub fn gamma_expansion_leading(lambda: f64, theta: f64, t: f64) -> Result<C64> {
    let cs = theta.cos();
    let den = (2.0 * theta).cos() + 2.0 * theta.sin().powi(2) * t.cos() + 3.0;
    if den.abs() < LOG_GUARD {
        return Err(Error::Domain { formula: "gamma expansion", reason: format!("denominator {den:e} at t = {t}") });
    }
    let s2 = (0.5 * theta).sin().powi(2);
    let shape = C64::new(t - t.sin(), t.cos() - 1.0);
    Ok(-2.0 * lambda * lambda * (0.5 * t).sin().powi(2) * shape / den * s2 * cs * (cs + 1.0))
}
