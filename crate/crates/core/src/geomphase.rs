//! Complex total, dynamical and geometric phases of a trajectory pair.
//!
//! With `r(t) = ⟨ψ̃(0)|ψ(t)⟩ / ⟨ψ̃(t)|ψ(0)⟩` the total phase is
//! `β_tot = −i log √r = ½·arg r − (i/2)·ln|r|`, where `arg r` is unwrapped
//! continuously from 0. The dynamical phase is `β_dyn = −∫⟨ψ̃|K|ψ⟩` with the
//! non-Hermitian Hamiltonian `K = H_s + iz*L − iL†Ō`, and the geometric
//! phase is their difference.

use std::f64::consts::PI;

use crate::dynamics::TrajectoryPair;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{braket, c, expect, Ket, I};
use crate::models::ModelSpec;
use crate::unwrap::ArgUnwrapper;
use crate::C64;

/// Overlap magnitude below which the phase is undefined.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// Knobs for phase extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    pub singularity_threshold: f64,
    /// Largest accepted per-step change of the unwrapped argument.
    pub max_arg_step: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { singularity_threshold: SINGULARITY_THRESHOLD, max_arg_step: PI }
    }
}

/// Phase series of one trajectory or of an ensemble mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub grid: TimeGrid,
    pub beta_tot: Vec<C64>,
    pub beta_dyn: Vec<C64>,
    pub beta: Vec<C64>,
    /// Smallest `|⟨ψ̃(t)|ψ(0)⟩·⟨ψ̃(0)|ψ(t)⟩|` met along the way.
    pub min_overlap_magnitude: f64,
}

impl PhaseSeries {
    pub fn last(&self) -> (C64, C64, C64) {
        let n = self.beta.len() - 1;
        (self.beta_tot[n], self.beta_dyn[n], self.beta[n])
    }
}

/// Incremental total-phase evaluator carrying its branch state, so a run can
/// be split in time and continued without changing the result.
#[derive(Debug, Clone)]
pub struct TotalPhaseTracker {
    psi0: Ket,
    psi_tilde0: Ket,
    unwrapper: ArgUnwrapper,
    threshold: f64,
    min_overlap: f64,
}

impl TotalPhaseTracker {
    pub fn new(psi0: &Ket, psi_tilde0: &Ket, opts: &PhaseOptions) -> Self {
        let r0 = braket(psi_tilde0, psi0) / braket(psi_tilde0, psi0).conj();
        Self {
            psi0: *psi0,
            psi_tilde0: *psi_tilde0,
            unwrapper: ArgUnwrapper::new(r0, 0.0, opts.max_arg_step),
            threshold: opts.singularity_threshold,
            min_overlap: f64::INFINITY,
        }
    }

    /// Ratio `r` and the product of the two overlap magnitudes.
    fn ratio(&self, psi: &Ket, psi_tilde: &Ket, time: f64) -> Result<(C64, f64)> {
        let num = braket(&self.psi_tilde0, psi);
        let den = braket(psi_tilde, &self.psi0);
        let small = num.norm().min(den.norm());
        if !(small >= self.threshold) {
            return Err(Error::PhaseSingularity { time, magnitude: small });
        }
        Ok((num / den, num.norm() * den.norm()))
    }

    /// Total phase at the next time point.
    pub fn push(&mut self, psi: &Ket, psi_tilde: &Ket, time: f64) -> Result<C64> {
        let (r, mag) = self.ratio(psi, psi_tilde, time)?;
        self.min_overlap = self.min_overlap.min(mag);
        let arg = self.unwrapper.push(r, time)?;
        Ok(C64::new(0.5 * arg, -0.5 * r.norm().ln()))
    }

    pub fn min_overlap_magnitude(&self) -> f64 {
        self.min_overlap
    }
}

fn total_phase_impl(pair: &TrajectoryPair, opts: &PhaseOptions) -> Result<(Vec<C64>, f64)> {
    let mut tr = TotalPhaseTracker::new(&pair.psi[0], &pair.psi_tilde[0], opts);
    let mut out = Vec::with_capacity(pair.psi.len());
    out.push(c(0.0));
    tr.min_overlap = tr.ratio(&pair.psi[0], &pair.psi_tilde[0], pair.grid.t0())?.1;
    for k in 1..pair.psi.len() {
        out.push(tr.push(&pair.psi[k], &pair.psi_tilde[k], pair.grid.t(k))?);
    }
    Ok((out, tr.min_overlap))
}

/// Branch-continuous total phase on the full grid.
pub fn total_phase(pair: &TrajectoryPair, opts: &PhaseOptions) -> Result<Vec<C64>> {
    total_phase_impl(pair, opts).map(|(b, _)| b)
}

/// `⟨ψ̃|K|ψ⟩` on the half-step grid.
fn energy_half(pair: &TrajectoryPair, model: &ModelSpec) -> Vec<C64> {
    (0..pair.grid.half_len())
        .map(|j| {
            let (p, q) = pair.at_half(j);
            expect(q, &model.effective_hamiltonian(j, pair.noise[j]), p)
        })
        .collect()
}

/// Cumulative composite-Simpson integral over each full step of a
/// half-grid series.
fn simpson_cumulative(f: &[C64], dt: f64) -> Vec<C64> {
    let n = (f.len() - 1) / 2;
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = c(0.0);
    out.push(acc);
    for k in 0..n {
        acc += dt / 6.0 * (f[2 * k] + 4.0 * f[2 * k + 1] + f[2 * k + 2]);
        out.push(acc);
    }
    out
}

/// Dynamical phase `−∫₀ᵗ⟨ψ̃|K|ψ⟩ds` on the full grid.
pub fn dynamical_phase(pair: &TrajectoryPair, model: &ModelSpec) -> Vec<C64> {
    simpson_cumulative(&energy_half(pair, model), pair.grid.dt()).into_iter().map(|v| -v).collect()
}

/// Total, dynamical and geometric phase of one trajectory.
pub fn geometric_phase(pair: &TrajectoryPair, model: &ModelSpec, opts: &PhaseOptions) -> Result<PhaseSeries> {
    let (beta_tot, min_overlap_magnitude) = total_phase_impl(pair, opts)?;
    let beta_dyn = dynamical_phase(pair, model);
    let beta = beta_tot.iter().zip(&beta_dyn).map(|(a, b)| a - b).collect();
    Ok(PhaseSeries { grid: pair.grid, beta_tot, beta_dyn, beta, min_overlap_magnitude })
}

/// Fourth-order finite-difference derivative of a uniformly sampled series.
fn derivative5(x: &[Ket], s: f64) -> Vec<Ket> {
    let m = x.len();
    let w = 1.0 / (12.0 * s);
    let comb = |cs: [f64; 5], idx: [usize; 5]| -> Ket {
        let mut acc = Ket::zeros();
        for (cc, i) in cs.iter().zip(idx) {
            acc += x[i] * c(*cc * w);
        }
        acc
    };
    (0..m)
        .map(|j| match j {
            0 => comb([-25.0, 48.0, -36.0, 16.0, -3.0], [0, 1, 2, 3, 4]),
            1 => comb([-3.0, -10.0, 18.0, -6.0, 1.0], [0, 1, 2, 3, 4]),
            _ if j == m - 2 => comb([3.0, 10.0, -18.0, 6.0, -1.0], [m - 1, m - 2, m - 3, m - 4, m - 5]),
            _ if j == m - 1 => comb([25.0, -48.0, 36.0, -16.0, 3.0], [m - 1, m - 2, m - 3, m - 4, m - 5]),
            _ => comb([1.0, -8.0, 0.0, 8.0, -1.0], [j - 2, j - 1, j, j + 1, j + 2]),
        })
        .collect()
}

/// Geometric phase as the integral of the connection one-form,
/// `β = i∫⟨χ̃|∂_s χ⟩ds`, along the reference sections
/// `|χ⟩ = e^{−iβ_tot}|ψ⟩`, `⟨χ̃| = e^{iβ_tot}⟨ψ̃|`.
///
/// The section derivative is split by the product rule,
/// `i⟨χ̃|∂χ⟩ = i⟨ψ̃|∂ψ⟩ + ∂β_tot`: the state part is differenced on the
/// half-step grid (fourth-order stencil, Simpson per step) and the phase
/// factor integrates exactly to the tracked `β_tot`. Differencing the
/// factor itself would amplify its fast winding near overlap nodes.
pub fn one_form_phase(pair: &TrajectoryPair, opts: &PhaseOptions) -> Result<Vec<C64>> {
    let m = pair.grid.half_len();
    if m < 5 {
        return Err(Error::InvalidGrid("one-form phase needs at least 2 steps".into()));
    }
    let beta_tot = total_phase(pair, opts)?;
    let psi: Vec<Ket> = (0..m).map(|j| *pair.at_half(j).0).collect();
    let d = derivative5(&psi, 0.5 * pair.grid.dt());
    let integrand: Vec<C64> = (0..m).map(|j| I * braket(pair.at_half(j).1, &d[j])).collect();
    Ok(simpson_cumulative(&integrand, pair.grid.dt()).into_iter().zip(beta_tot).map(|(a, b)| a + b).collect())
}

/// Geodesic residual of a path of state pairs sampled with
/// spacing `ds`, at interior points.
///
/// With `A = ⟨φ̃|φ′⟩` and the covariant derivative `D = ∂_s − A`, returns
/// `‖(1 − |φ⟩⟨φ̃|) D²φ‖`, which vanishes on geodesics.
pub fn geodesic_residual(path: &[(Ket, Ket)], ds: f64) -> Result<Vec<f64>> {
    let m = path.len();
    if m < 5 {
        return Err(Error::InvalidGrid(format!("geodesic residual needs at least 5 points, got {m}")));
    }
    let phi: Vec<Ket> = path.iter().map(|p| p.0).collect();
    let d1: Vec<Ket> = (0..m)
        .map(|k| match k {
            0 => (phi[1] * c(4.0) - phi[0] * c(3.0) - phi[2]) * c(0.5 / ds),
            _ if k == m - 1 => (phi[m - 1] * c(3.0) - phi[m - 2] * c(4.0) + phi[m - 3]) * c(0.5 / ds),
            _ => (phi[k + 1] - phi[k - 1]) * c(0.5 / ds),
        })
        .collect();
    let a: Vec<C64> = (0..m).map(|k| braket(&path[k].1, &d1[k])).collect();
    Ok((1..m - 1)
        .map(|k| {
            let d2 = (phi[k + 1] - phi[k] * c(2.0) + phi[k - 1]) * c(1.0 / (ds * ds));
            let da = (a[k + 1] - a[k - 1]) / (2.0 * ds);
            let v = d2 - phi[k] * da - d1[k] * (2.0 * a[k]) + phi[k] * (a[k] * a[k]);
            let proj = v - phi[k] * braket(&path[k].1, &v);
            proj.norm()
        })
        .collect())
}

/// Accumulated connection one-form `i∫⟨φ̃|∂_s φ⟩ds` along a sampled path
/// (trapezoid rule, second-order differences).
pub fn connection_accumulation(path: &[(Ket, Ket)], ds: f64) -> C64 {
    let m = path.len();
    if m < 3 {
        return c(0.0);
    }
    let deriv = |k: usize| match k {
        0 => (path[1].0 * c(4.0) - path[0].0 * c(3.0) - path[2].0) * c(0.5 / ds),
        _ if k == m - 1 => (path[m - 1].0 * c(3.0) - path[m - 2].0 * c(4.0) + path[m - 3].0) * c(0.5 / ds),
        _ => (path[k + 1].0 - path[k - 1].0) * c(0.5 / ds),
    };
    let f: Vec<C64> = (0..m).map(|k| I * braket(&path[k].1, &deriv(k))).collect();
    f.windows(2).map(|w| 0.5 * ds * (w[0] + w[1])).sum()
}

/// Geodesic of the Hermitian state space through `phi0` with initial
/// velocity `v`, from `φ'' = −‖φ′‖²φ` integrated with RK4.
///
/// A velocity orthogonal to `phi0` gives a horizontal (parallel-transported)
/// lift, i.e. a great circle traversed at speed `‖v‖`.
pub fn integrate_geodesic(phi0: &Ket, v: &Ket, ds: f64, n: usize) -> Vec<(Ket, Ket)> {
    crate::ode::rk4_path(0.0, ds, n, (*phi0, *v), |_, y: &(Ket, Ket)| (y.1, y.0 * c(-y.1.norm_squared())))
        .into_iter()
        .map(|(p, _)| (p, p))
        .collect()
}
