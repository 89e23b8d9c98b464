//! Monte Carlo averaging over noise realizations and the deterministic `ρ̃`
//! equation.
//!
//! Trajectories are generated and analysed in parallel batches; results are
//! then folded sequentially in trajectory-index order with compensated sums,
//! so the output depends only on `(master_seed, n_traj)` and not on the
//! number of worker threads.
//!
//! Averages are taken over per-trajectory phases (average of phases, not
//! phase of averaged overlaps). Because `√` is two-valued, each trajectory's
//! `Re β_tot` is first moved by a multiple of π onto the sheet nearest the
//! noise-free reference trajectory; without this, trajectories that wind
//! around an overlap zero in opposite directions would be averaged across
//! sheets.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::bath::{sample_noise_path, NoisePath};
use crate::dynamics::{propagate_pair, propagate_pair_with, TrajectoryPair, DEFAULT_OVERLAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::geomphase::{geometric_phase, PhaseOptions, PhaseSeries};
use crate::grid::TimeGrid;
use crate::linalg::{c, outer, Op};
use crate::models::ModelSpec;
use crate::ode::rk4_half_grid;
use crate::unwrap::nearest_sheet;
use crate::C64;

/// Fraction of trajectories that may be dropped for phase singularities.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

/// Bound on `|tr ρ̃ − 1|`.
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub n_traj: usize,
    pub master_seed: u64,
    pub phase: PhaseOptions,
    pub overlap_tolerance: f64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Move each trajectory onto the √-sheet of the noise-free reference
    /// before averaging.
    pub align_sheets: bool,
}

impl EnsembleOptions {
    pub fn new(n_traj: usize, master_seed: u64) -> Self {
        Self {
            n_traj,
            master_seed,
            phase: PhaseOptions::default(),
            overlap_tolerance: DEFAULT_OVERLAP_TOLERANCE,
            threads: None,
            align_sheets: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_traj < 2 {
            return Err(Error::param("n_traj", format!("need at least 2 trajectories, got {}", self.n_traj)));
        }
        Ok(())
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running first and second moments of a complex value about a fixed shift.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    re: Neumaier,
    im: Neumaier,
    sq: Neumaier,
}

impl Moments {
    #[inline]
    fn add(&mut self, d: C64) {
        self.re.add(d.re);
        self.im.add(d.im);
        self.sq.add(d.norm_sqr());
    }

    /// `(mean − shift, stderr)` for `n` samples.
    fn finish(&self, n: usize) -> (C64, f64) {
        let nf = n as f64;
        let s1 = C64::new(self.re.value(), self.im.value());
        let var = ((self.sq.value() - s1.norm_sqr() / nf) / (nf - 1.0)).max(0.0);
        (s1 / nf, (var / nf).sqrt())
    }
}

/// Ensemble mean of a complex series with its standard error (real and
/// imaginary parts pooled as a complex magnitude).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: Vec<C64>,
    pub stderr: Vec<f64>,
    pub master_seed: u64,
}

struct SeriesAccumulator {
    shift: Vec<C64>,
    moments: Vec<Moments>,
}

impl SeriesAccumulator {
    fn new(shift: Vec<C64>) -> Self {
        let moments = vec![Moments::default(); shift.len()];
        Self { shift, moments }
    }

    fn add(&mut self, x: &[C64]) {
        for ((m, s), v) in self.moments.iter_mut().zip(&self.shift).zip(x) {
            m.add(v - s);
        }
    }

    fn finish(&self, n: usize, master_seed: u64) -> EnsembleStats {
        let (mean, stderr) = self
            .moments
            .iter()
            .zip(&self.shift)
            .map(|(m, s)| {
                let (d, e) = m.finish(n);
                (s + d, e)
            })
            .unzip();
        EnsembleStats { n, mean, stderr, master_seed }
    }
}

/// Ensemble-averaged phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEnsemble {
    pub grid: TimeGrid,
    pub beta_tot: EnsembleStats,
    pub beta_dyn: EnsembleStats,
    pub beta: EnsembleStats,
    /// Indices of trajectories dropped for phase singularities or branch jumps.
    pub excluded: Vec<u64>,
    /// The noise-free reference used for sheet alignment.
    pub reference: PhaseSeries,
}

/// Run `work` for every trajectory index in parallel batches and fold the
/// results in index order. Phase failures are collected instead of aborting.
fn for_each_trajectory<T, W, F>(opts: &EnsembleOptions, batch: usize, work: W, mut fold: F) -> Result<Vec<u64>>
where
    T: Send,
    W: Fn(u64) -> Result<T> + Sync,
    F: FnMut(T),
{
    let limit = (MAX_EXCLUDED_FRACTION * opts.n_traj as f64).floor() as usize;
    let pool = match opts.threads {
        Some(k) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?,
        ),
        None => None,
    };
    let mut excluded = Vec::new();
    let n = opts.n_traj as u64;
    let batch = batch.max(1) as u64;
    let mut start = 0;
    while start < n {
        let end = (start + batch).min(n);
        let par = || (start..end).into_par_iter().map(&work).collect::<Vec<Result<T>>>();
        let results = match &pool {
            Some(p) => p.install(par),
            None => par(),
        };
        for (i, r) in (start..end).zip(results) {
            match r {
                Ok(v) => fold(v),
                Err(e) if e.is_phase_failure() => {
                    excluded.push(i);
                    if excluded.len() > limit {
                        return Err(Error::ExcessiveExclusions { excluded: excluded.len(), n_traj: opts.n_traj, limit });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        start = end;
    }
    Ok(excluded)
}

/// Batch size keeping roughly `budget` complex values alive per batch.
fn batch_for(grid: &TimeGrid, per_point: usize) -> usize {
    const BUDGET: usize = 1 << 22;
    (BUDGET / (grid.len() * per_point).max(1)).clamp(1, 1024)
}

/// Phases of the noise-free trajectory pair.
///
/// Every averaged quantity in the built-in models depends on the noise only
/// through `z*`, so formal noise averages of analytic functionals equal their
/// value at zero noise; this is the mean-field reference.
pub fn mean_field_phase_series(model: &ModelSpec, phase: &PhaseOptions) -> Result<PhaseSeries> {
    let pair = propagate_pair(model, &NoisePath::zero(model.grid))?;
    geometric_phase(&pair, model, phase)
}

fn trajectory(model: &ModelSpec, opts: &EnsembleOptions, index: u64) -> Result<TrajectoryPair> {
    let noise = sample_noise_path(&model.bath, &model.grid, opts.master_seed, index)?;
    propagate_pair_with(model, &noise, opts.overlap_tolerance)
}

/// Phases of one trajectory of an ensemble run, before sheet alignment.
pub fn trajectory_phases(model: &ModelSpec, opts: &EnsembleOptions, index: u64) -> Result<PhaseSeries> {
    geometric_phase(&trajectory(model, opts, index)?, model, &opts.phase)
}

/// Move `Re β_tot` onto the sheet of `reference` and recompute `β`.
pub fn align_to_reference(series: &mut PhaseSeries, reference: &PhaseSeries) {
    for k in 0..series.beta_tot.len() {
        let b = &mut series.beta_tot[k];
        b.re = nearest_sheet(b.re, reference.beta_tot[k].re);
        series.beta[k] = *b - series.beta_dyn[k];
    }
}

/// Monte Carlo average of the total, dynamical and geometric phases.
pub fn average_phase_series(model: &ModelSpec, opts: &EnsembleOptions) -> Result<PhaseEnsemble> {
    opts.validate()?;
    let reference = mean_field_phase_series(model, &opts.phase)?;
    let mut acc = [
        SeriesAccumulator::new(reference.beta_tot.clone()),
        SeriesAccumulator::new(reference.beta_dyn.clone()),
        SeriesAccumulator::new(reference.beta.clone()),
    ];
    let mut used = 0usize;
    let work = |i: u64| -> Result<PhaseSeries> {
        let mut s = trajectory_phases(model, opts, i)?;
        if opts.align_sheets {
            align_to_reference(&mut s, &reference);
        }
        Ok(s)
    };
    let excluded = for_each_trajectory(opts, batch_for(&model.grid, 3), work, |s: PhaseSeries| {
        acc[0].add(&s.beta_tot);
        acc[1].add(&s.beta_dyn);
        acc[2].add(&s.beta);
        used += 1;
    })?;
    if used < 2 {
        return Err(Error::ExcessiveExclusions { excluded: excluded.len(), n_traj: opts.n_traj, limit: opts.n_traj - 2 });
    }
    Ok(PhaseEnsemble {
        grid: model.grid,
        beta_tot: acc[0].finish(used, opts.master_seed),
        beta_dyn: acc[1].finish(used, opts.master_seed),
        beta: acc[2].finish(used, opts.master_seed),
        excluded,
        reference,
    })
}

/// Sequence of operators on the full grid; `mid` holds dense-output
/// midpoints when the series comes from a deterministic integration.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySeries {
    pub grid: TimeGrid,
    pub rho: Vec<Op>,
    pub mid: Vec<Op>,
    /// Element-wise standard error for Monte Carlo estimates.
    pub stderr: Option<Vec<Matrix3<f64>>>,
}

/// `ρ(t) = M[|ψ(t)⟩⟨ψ(t)|]`, Hermitized.
pub fn reduced_density(model: &ModelSpec, opts: &EnsembleOptions) -> Result<DensitySeries> {
    opts.validate()?;
    let grid = model.grid;
    let mut acc = vec![[Moments::default(); 9]; grid.len()];
    let mut used = 0usize;
    let work = |i: u64| -> Result<Vec<crate::linalg::Ket>> { Ok(trajectory(model, opts, i)?.psi) };
    let excluded = for_each_trajectory(opts, batch_for(&grid, 3), work, |psi| {
        for (a, p) in acc.iter_mut().zip(&psi) {
            let m = outer(p, p);
            for (slot, v) in a.iter_mut().zip(m.iter()) {
                slot.add(*v);
            }
        }
        used += 1;
    })?;
    debug_assert!(excluded.is_empty());
    let mut rho = Vec::with_capacity(grid.len());
    let mut err = Vec::with_capacity(grid.len());
    for a in &acc {
        let mut m = Op::zeros();
        let mut e = Matrix3::<f64>::zeros();
        for (idx, slot) in a.iter().enumerate() {
            let (mean, se) = slot.finish(used);
            m[idx] = mean;
            e[idx] = se;
        }
        rho.push((m + m.adjoint()) * c(0.5));
        err.push(e);
    }
    Ok(DensitySeries { grid, rho, mid: Vec::new(), stderr: Some(err) })
}

/// Deterministic `∂tρ̃ = −i[H_s, ρ̃] − [L†Ō, ρ̃]` from `ρ̃(0) = |ψ₀⟩⟨ψ₀|`.
pub fn evolve_rho_tilde(model: &ModelSpec) -> Result<DensitySeries> {
    let grid = model.grid;
    let psi0 = model.initial_state();
    let rho0 = outer(&psi0, &psi0);
    let mut rho = Vec::with_capacity(grid.len());
    let mut mid = Vec::with_capacity(grid.n_steps());
    rho.push(rho0);
    let tr0 = rho0.trace();
    rk4_half_grid(
        grid.n_steps(),
        grid.dt(),
        rho0,
        |j, r: &Op| {
            let d = model.drift(j);
            d * r - r * d
        },
        |k, m, next| {
            let drift = (next.trace() - tr0).norm();
            let time = grid.t(k + 1);
            if !(drift <= TRACE_TOLERANCE) {
                return Err(Error::TraceDrift { what: "rho_tilde", time, drift });
            }
            let size = next.norm();
            if !(size <= crate::models::BLOWUP_LIMIT) {
                return Err(Error::BlowUp { what: "rho_tilde", time, magnitude: size });
            }
            mid.push(*m);
            rho.push(*next);
            Ok(())
        },
    )?;
    Ok(DensitySeries { grid, rho, mid, stderr: None })
}
