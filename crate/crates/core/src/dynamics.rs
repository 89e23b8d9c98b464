//! Propagation of the trajectory pair `|ψ⟩`, `|ψ̃⟩`.
//!
//! `|ψ⟩` follows the QSD equation `∂t|ψ⟩ = G(t)|ψ⟩` with
//! `G = −iH_s + z*_t L − L†Ō(t)`; its partner follows `∂t|ψ̃⟩ = −G†|ψ̃⟩`, so
//! `⟨ψ̃|ψ⟩` is a constant of motion. Both states are kept unnormalized.
//! The noise is treated as a fixed sampled signal and the pair is
//! integrated pathwise with classical RK4 on the half-step grid.
//!
//! `|ψ⟩` is advanced by the RK4 step propagator `P_k`, and `|ψ̃⟩` by
//! `(P_k⁻¹)†`. Both are fourth-order accurate, and the overlap is conserved
//! to round-off. Stepping the two equations independently would only conserve
//! it to the local error of the scheme, which the rough noise inflates.

use crate::bath::{kernel_double_integral, NoisePath};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{braket, c, Ket, Op, I};
use crate::models::{ModelKind, ModelSpec};
use crate::C64;

/// Default bound on `|⟨ψ̃|ψ⟩ − 1|` along a trajectory.
pub const DEFAULT_OVERLAP_TOLERANCE: f64 = 1e-8;

/// A propagated pair on the full grid, plus dense-output midpoints and the
/// noise samples it consumed (needed for the dynamical phase).
#[derive(Debug, Clone)]
pub struct TrajectoryPair {
    pub grid: TimeGrid,
    pub psi: Vec<Ket>,
    pub psi_tilde: Vec<Ket>,
    /// States at `t_k + dt/2`, `k = 0..n_steps`.
    pub psi_mid: Vec<Ket>,
    pub psi_tilde_mid: Vec<Ket>,
    /// `⟨ψ̃(t_k)|ψ(t_k)⟩`.
    pub overlap: Vec<C64>,
    /// Noise samples on the half-step grid.
    pub noise: Vec<C64>,
}

impl TrajectoryPair {
    /// State pair at half-step index `j`.
    pub fn at_half(&self, j: usize) -> (&Ket, &Ket) {
        if j % 2 == 0 {
            (&self.psi[j / 2], &self.psi_tilde[j / 2])
        } else {
            (&self.psi_mid[j / 2], &self.psi_tilde_mid[j / 2])
        }
    }

    pub fn max_overlap_drift(&self) -> f64 {
        self.overlap.iter().map(|o| (o - 1.0).norm()).fold(0.0, f64::max)
    }
}

fn check_noise(model: &ModelSpec, noise: &NoisePath) -> Result<()> {
    if noise.grid != model.grid || noise.samples.len() != model.grid.half_len() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Propagate the pair with the default overlap tolerance.
pub fn propagate_pair(model: &ModelSpec, noise: &NoisePath) -> Result<TrajectoryPair> {
    propagate_pair_with(model, noise, DEFAULT_OVERLAP_TOLERANCE)
}

/// Propagate the pair, failing if `|⟨ψ̃|ψ⟩ − 1|` exceeds `tolerance`.
pub fn propagate_pair_with(model: &ModelSpec, noise: &NoisePath, tolerance: f64) -> Result<TrajectoryPair> {
    check_noise(model, noise)?;
    let grid = model.grid;
    let n = grid.n_steps();
    let psi0 = model.initial_state();
    let mut pair = TrajectoryPair {
        grid,
        psi: Vec::with_capacity(n + 1),
        psi_tilde: Vec::with_capacity(n + 1),
        psi_mid: Vec::with_capacity(n),
        psi_tilde_mid: Vec::with_capacity(n),
        overlap: Vec::with_capacity(n + 1),
        noise: noise.samples.clone(),
    };
    pair.psi.push(psi0);
    pair.psi_tilde.push(psi0);
    pair.overlap.push(braket(&psi0, &psi0));

    let z = &noise.samples;
    let dt = grid.dt();
    let one = Op::identity();
    let (mut psi, mut psi_t) = (psi0, psi0);
    for k in 0..n {
        let g1 = model.generator(2 * k, z[2 * k]);
        let g2 = model.generator(2 * k + 1, z[2 * k + 1]);
        let g4 = model.generator(2 * k + 2, z[2 * k + 2]);
        // RK4 applied to the identity gives the step propagator and its
        // dense-output midpoint
        let k1 = g1;
        let k2 = g2 * (one + k1 * c(0.5 * dt));
        let k3 = g2 * (one + k2 * c(0.5 * dt));
        let k4 = g4 * (one + k3 * c(dt));
        let step = one + (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0);
        let half = one + (k1 * c(5.0 / 24.0) + (k2 + k3) * c(1.0 / 6.0) - k4 * c(1.0 / 24.0)) * c(dt);
        let time = grid.t(k + 1);
        let (Some(step_inv), Some(half_inv)) = (step.try_inverse(), half.try_inverse()) else {
            return Err(Error::BlowUp { what: "step propagator", time, magnitude: f64::INFINITY });
        };
        pair.psi_mid.push(half * psi);
        pair.psi_tilde_mid.push(half_inv.adjoint() * psi_t);
        psi = step * psi;
        psi_t = step_inv.adjoint() * psi_t;
        let ov = braket(&psi_t, &psi);
        let drift = (ov - 1.0).norm();
        if !(drift <= tolerance) {
            return Err(Error::OverlapDrift { step: k + 1, time, drift, tolerance });
        }
        pair.psi.push(psi);
        pair.psi_tilde.push(psi_t);
        pair.overlap.push(ov);
    }
    Ok(pair)
}

/// Closed-form trajectory pair of the pure-dephasing model.
///
/// The generator is diagonal, so each amplitude is an exponential of
/// `∓iωt/2 − λ²∫A ± λ∫z*`. The noise integral uses composite Simpson on the
/// half-step grid (the rule RK4 applies to tabulated samples); midpoints use
/// the three-point quadratic rule over the first half step.
pub fn analytic_dephasing_pair(model: &ModelSpec, noise: &NoisePath) -> Result<TrajectoryPair> {
    if model.kind != ModelKind::Dephasing2L {
        return Err(Error::WrongModelKind { expected: "dephasing", found: model.kind.as_str() });
    }
    check_noise(model, noise)?;
    let grid = model.grid;
    let n = grid.n_steps();
    let dt = grid.dt();
    let zc: Vec<C64> = noise.samples.iter().map(|z| z.conj()).collect();

    // ∫z* on the half-step grid
    let mut zint = vec![c(0.0); grid.half_len()];
    for k in 0..n {
        let (a, m, b) = (zc[2 * k], zc[2 * k + 1], zc[2 * k + 2]);
        zint[2 * k + 1] = zint[2 * k] + dt / 24.0 * (5.0 * a + 8.0 * m - b);
        zint[2 * k + 2] = zint[2 * k] + dt / 6.0 * (a + 4.0 * m + b);
    }

    let lam = model.lambda;
    let (cs, sn) = ((0.5 * model.theta).cos(), (0.5 * model.theta).sin());
    let state = |j: usize| {
        let t = grid.half_t(j);
        let rel = t - grid.t0();
        let common = -lam * lam * kernel_double_integral(&model.bath, rel);
        let e0 = -I * (0.5 * model.omega * rel) + common + lam * zint[j];
        let e1 = I * (0.5 * model.omega * rel) + common - lam * zint[j];
        let psi = Ket::new(cs * e0.exp(), sn * e1.exp(), c(0.0));
        let psi_t = Ket::new(cs * (-e0.conj()).exp(), sn * (-e1.conj()).exp(), c(0.0));
        (psi, psi_t)
    };

    let mut pair = TrajectoryPair {
        grid,
        psi: Vec::with_capacity(n + 1),
        psi_tilde: Vec::with_capacity(n + 1),
        psi_mid: Vec::with_capacity(n),
        psi_tilde_mid: Vec::with_capacity(n),
        overlap: Vec::with_capacity(n + 1),
        noise: noise.samples.clone(),
    };
    for j in 0..grid.half_len() {
        let (p, q) = state(j);
        if j % 2 == 0 {
            pair.psi.push(p);
            pair.psi_tilde.push(q);
            pair.overlap.push(braket(&q, &p));
        } else {
            pair.psi_mid.push(p);
            pair.psi_tilde_mid.push(q);
        }
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{sample_noise_path, BathParams};
    use crate::models::build_model;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn model(kind: ModelKind, lambda: f64, theta: f64, grid: TimeGrid) -> ModelSpec {
        build_model(kind, 1.0, lambda, BathParams::default(), theta, None, grid).unwrap()
    }

    #[test]
    fn decoupled_pair_is_unitary() {
        let g = TimeGrid::span(PI, 1000).unwrap();
        let m = model(ModelKind::Dissipative2L, 0.0, PI / 2.0, g);
        let pair = propagate_pair(&m, &NoisePath::zero(g)).unwrap();
        let expect = Ket::new(-I * FRAC_1_SQRT_2, I * FRAC_1_SQRT_2, c(0.0));
        assert!((pair.psi[1000] - expect).norm() < 1e-9);
        assert!((pair.psi_tilde[1000] - expect).norm() < 1e-9);
    }

    #[test]
    fn dephasing_matches_closed_form() {
        let g = TimeGrid::covering(TAU, 1e-3).unwrap();
        let m = model(ModelKind::Dephasing2L, 1.0, 1.2, g);
        for seed in [1, 2, 3] {
            let z = sample_noise_path(&m.bath, &g, seed, 0).unwrap();
            let num = propagate_pair(&m, &z).unwrap();
            let ana = analytic_dephasing_pair(&m, &z).unwrap();
            let sup = |a: &[Ket], b: &[Ket]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let full = sup(&num.psi, &ana.psi).max(sup(&num.psi_tilde, &ana.psi_tilde));
            let mid = sup(&num.psi_mid, &ana.psi_mid).max(sup(&num.psi_tilde_mid, &ana.psi_tilde_mid));
            assert!(full < 1e-7 && mid < 1e-7, "seed {seed}: {full} {mid}");
            assert!(ana.max_overlap_drift() < 1e-13);
        }
    }

    #[test]
    fn dissipative_excited_amplitude_ignores_noise() {
        let g = TimeGrid::covering(TAU, 1e-3 * TAU).unwrap();
        let m = model(ModelKind::Dissipative2L, 1.0, 1.0, g);
        let a = propagate_pair(&m, &sample_noise_path(&m.bath, &g, 5, 0).unwrap()).unwrap();
        let b = propagate_pair(&m, &sample_noise_path(&m.bath, &g, 6, 0).unwrap()).unwrap();
        let f = m.primary_coeff();
        let dt = g.dt();
        let mut int_f = c(0.0);
        for k in 0..g.n_steps() {
            assert_eq!(a.psi[k][0], b.psi[k][0]);
            let expect = (0.5f64).cos() * (-I * (0.5 * g.t(k)) - int_f).exp();
            assert!((a.psi[k][0] - expect).norm() < 1e-9, "k = {k}");
            int_f += dt / 6.0 * (f[2 * k] + 4.0 * f[2 * k + 1] + f[2 * k + 2]);
        }
    }

    #[test]
    fn mismatched_noise_rejected() {
        let g = TimeGrid::span(1.0, 10).unwrap();
        let m = model(ModelKind::Dephasing2L, 1.0, 1.0, g);
        let other = NoisePath::zero(TimeGrid::span(1.0, 11).unwrap());
        assert!(matches!(propagate_pair(&m, &other), Err(Error::GridMismatch)));
        let d = model(ModelKind::Dissipative2L, 1.0, 1.0, g);
        assert!(matches!(analytic_dephasing_pair(&d, &NoisePath::zero(g)), Err(Error::WrongModelKind { .. })));
    }

    #[test]
    fn overlap_drift_names_the_step() {
        let g = TimeGrid::span(TAU, 40).unwrap();
        let m = model(ModelKind::Dephasing2L, 1.0, 1.0, g);
        let z = sample_noise_path(&m.bath, &g, 1, 0).unwrap();
        match propagate_pair_with(&m, &z, 0.0) {
            Err(Error::OverlapDrift { step, .. }) => assert!(step >= 1),
            other => panic!("expected drift error, got {other:?}"),
        }
    }
}
