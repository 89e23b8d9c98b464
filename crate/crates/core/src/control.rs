//! Leakage-elimination-operator control of the three-level model.
//!
//! For `L = λ(|3⟩⟨1| + |3⟩⟨2|)` the noise only feeds the leaked amplitude
//! `ψ₃`, and the adjoint never populates `ψ̃₃`. The overlaps entering the
//! total phase therefore involve only noise-free components, and the total
//! phase follows from one deterministic sub-propagation. The averaged
//! dynamical phase uses the trace form `−∫tr[(H_s − iL†Ō)ρ̃]`.

use crate::bath::{BathParams, NoisePath};
use crate::dynamics::propagate_pair;
use crate::ensemble::{evolve_rho_tilde, DensitySeries};
use crate::error::{Error, Result};
use crate::geomphase::{total_phase, PhaseOptions, PhaseSeries};
use crate::grid::TimeGrid;
use crate::linalg::{c, I};
use crate::models::{build_model, ControlField, ModelKind, ModelSpec};
use crate::C64;

fn require_leo(model: &ModelSpec) -> Result<()> {
    if model.kind != ModelKind::Leo3L {
        return Err(Error::WrongModelKind { expected: "leo", found: model.kind.as_str() });
    }
    Ok(())
}

/// Deterministic total phase of the LEO model.
pub fn leo_total_phase(model: &ModelSpec, opts: &PhaseOptions) -> Result<Vec<C64>> {
    require_leo(model)?;
    let pair = propagate_pair(model, &NoisePath::zero(model.grid))?;
    total_phase(&pair, opts)
}

/// Averaged dynamical phase `−∫₀ᵗ tr[H_s ρ̃ − iL†Ō ρ̃] ds` from a `ρ̃` series.
pub fn dyn_phase_from_rho_tilde(model: &ModelSpec, rho: &DensitySeries) -> Vec<C64> {
    let grid = model.grid;
    let energy = |j: usize| {
        let r = if j % 2 == 0 { &rho.rho[j / 2] } else { &rho.mid[j / 2] };
        let k = model.hamiltonian(grid.half_t(j)) - model.l_dag_obar(j) * I;
        (k * r).trace()
    };
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = c(0.0);
    out.push(acc);
    for k in 0..grid.n_steps() {
        acc -= dt / 6.0 * (energy(2 * k) + 4.0 * energy(2 * k + 1) + energy(2 * k + 2));
        out.push(acc);
    }
    out
}

/// Averaged dynamical phase of the LEO model.
pub fn leo_dyn_phase(model: &ModelSpec) -> Result<Vec<C64>> {
    require_leo(model)?;
    Ok(dyn_phase_from_rho_tilde(model, &evolve_rho_tilde(model)?))
}

/// Full phase series of a LEO model: deterministic total phase and trace-form
/// dynamical phase.
pub fn leo_phase_series(model: &ModelSpec, opts: &PhaseOptions) -> Result<PhaseSeries> {
    let beta_tot = leo_total_phase(model, opts)?;
    let beta_dyn = leo_dyn_phase(model)?;
    let beta = beta_tot.iter().zip(&beta_dyn).map(|(a, b)| a - b).collect();
    Ok(PhaseSeries { grid: model.grid, beta_tot, beta_dyn, beta, min_overlap_magnitude: f64::NAN })
}

/// Target, uncontrolled and controlled runs of the LEO experiment.
#[derive(Debug, Clone)]
pub struct LeoExperiment {
    pub model: ModelSpec,
    pub target_model: ModelSpec,
    pub target: PhaseSeries,
    pub uncontrolled: PhaseSeries,
    pub controlled: PhaseSeries,
}

fn sup_im(s: &PhaseSeries) -> f64 {
    s.beta.iter().map(|b| b.im.abs()).fold(0.0, f64::max)
}

impl LeoExperiment {
    /// `sup_t |Im β|` of the controlled run.
    pub fn sup_im_controlled(&self) -> f64 {
        sup_im(&self.controlled)
    }

    pub fn sup_im_uncontrolled(&self) -> f64 {
        sup_im(&self.uncontrolled)
    }

    /// `sup_t |Re β_controlled − Re β_target|`.
    pub fn max_real_deviation(&self) -> f64 {
        self.controlled.beta.iter().zip(&self.target.beta).map(|(a, b)| (a.re - b.re).abs()).fold(0.0, f64::max)
    }
}

/// Run the target (`λ = 0`, no control), uncontrolled and controlled models.
pub fn run_leo_experiment(
    omega: f64,
    lambda: f64,
    bath: BathParams,
    theta: f64,
    control: ControlField,
    grid: TimeGrid,
    opts: &PhaseOptions,
) -> Result<LeoExperiment> {
    let model = build_model(ModelKind::Leo3L, omega, lambda, bath, theta, Some(control), grid)?;
    let bare = build_model(ModelKind::Leo3L, omega, lambda, bath, theta, Some(ControlField::OFF), grid)?;
    let target_model = build_model(ModelKind::Leo3L, omega, 0.0, bath, theta, Some(ControlField::OFF), grid)?;
    Ok(LeoExperiment {
        target: leo_phase_series(&target_model, opts)?,
        uncontrolled: leo_phase_series(&bare, opts)?,
        controlled: leo_phase_series(&model, opts)?,
        model,
        target_model,
    })
}
