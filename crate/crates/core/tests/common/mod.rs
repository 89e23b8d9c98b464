//! Structural checks shared by the integration and acceptance targets.
//! Each returns the worst measured value so callers can print it.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use geodec::bath::{kernel, sample_noise_path, BathParams};
use geodec::dynamics::{propagate_pair, TrajectoryPair};
use geodec::ensemble::{average_phase_series, evolve_rho_tilde, EnsembleOptions};
use geodec::geomphase::{
    connection_accumulation, geodesic_residual, geometric_phase, integrate_geodesic, one_form_phase, PhaseOptions,
};
use geodec::linalg::Ket;
use geodec::models::{build_model, ControlField, ModelKind, ModelSpec};
use geodec::{TimeGrid, C64};

pub const KINDS: [ModelKind; 3] = [ModelKind::Dissipative2L, ModelKind::Dephasing2L, ModelKind::Leo3L];

/// Model at `ω = 1`, `γ = Γ = 1` over one period.
pub fn model(kind: ModelKind, lambda: f64, theta: f64, n_steps: usize) -> ModelSpec {
    let grid = TimeGrid::span(TAU, n_steps).unwrap();
    let control = (kind == ModelKind::Leo3L).then_some(ControlField { c_x: 10.0, omega_c: 50.0 });
    build_model(kind, 1.0, lambda, BathParams::default(), theta, control, grid).unwrap()
}

pub fn pair(m: &ModelSpec, seed: u64, index: u64) -> TrajectoryPair {
    let z = sample_noise_path(&m.bath, &m.grid, seed, index).unwrap();
    propagate_pair(m, &z).unwrap()
}

/// Worst `|⟨ψ̃|ψ⟩ − 1|` over `seeds` trajectories of every model.
pub fn overlap_conservation(seeds: u64) -> f64 {
    let mut worst = 0.0f64;
    for kind in KINDS {
        let m = model(kind, 1.0, 1.0, 1000);
        for s in 0..seeds {
            worst = worst.max(pair(&m, 1000 + s, s).max_overlap_drift());
        }
    }
    worst
}

/// Worst `|β_one-form − (β_tot − β_dyn)|` over `seeds` trajectories of every
/// model at `λ ∈ {0.5, 1}`. Two-level models run at `dt = 2π/4000`, the LEO
/// model at its default `2π/20000`, which resolves the control field.
pub fn one_form_consistency(seeds: u64) -> f64 {
    let opts = PhaseOptions::default();
    let mut worst = 0.0f64;
    for kind in KINDS {
        let n = if kind == ModelKind::Leo3L { 20_000 } else { 4000 };
        for lambda in [0.5, 1.0] {
            let m = model(kind, lambda, 1.0, n);
            for s in 0..seeds {
                let p = pair(&m, 77, s);
                let diff = geometric_phase(&p, &m, &opts).unwrap();
                let of = one_form_phase(&p, &opts).unwrap();
                for (a, b) in of.iter().zip(&diff.beta) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
    }
    worst
}

/// Apply `|ψ⟩ → e^{iχ}|ψ⟩`, `|ψ̃⟩ → e^{iχ̄}|ψ̃⟩` with a complex, time-dependent
/// `χ`; this keeps `⟨ψ̃|ψ⟩` fixed.
pub fn regauge(p: &TrajectoryPair, chi: impl Fn(f64) -> C64) -> TrajectoryPair {
    let mut q = p.clone();
    let g = p.grid;
    let f = |v: &Ket, t: f64| v * (C64::i() * chi(t)).exp();
    let ft = |v: &Ket, t: f64| v * (C64::i() * chi(t).conj()).exp();
    for k in 0..g.len() {
        q.psi[k] = f(&p.psi[k], g.t(k));
        q.psi_tilde[k] = ft(&p.psi_tilde[k], g.t(k));
    }
    for k in 0..g.n_steps() {
        let t = g.half_t(2 * k + 1);
        q.psi_mid[k] = f(&p.psi_mid[k], t);
        q.psi_tilde_mid[k] = ft(&p.psi_tilde_mid[k], t);
    }
    q
}

/// Worst change of the geometric phase (one-form form) under a smooth
/// complex gauge transformation, on the one-form grids.
pub fn gauge_invariance(seeds: u64) -> f64 {
    let opts = PhaseOptions::default();
    let chi = |t: f64| C64::new(0.7 * (1.3 * t).sin() + 0.2 * t, 0.05 * (0.9 * t).cos() - 0.05);
    let mut worst = 0.0f64;
    for kind in KINDS {
        let n = if kind == ModelKind::Leo3L { 20_000 } else { 4000 };
        let m = model(kind, 1.0, 1.2, n);
        for s in 0..seeds {
            let p = pair(&m, 5, s);
            let a = one_form_phase(&p, &opts).unwrap();
            let b = one_form_phase(&regauge(&p, chi), &opts).unwrap();
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).norm());
            }
        }
    }
    worst
}

/// Largest `|estimate − α(t,s)| / stderr` of the two-time covariance
/// `E[z(t)z̄(s)]`, and of `|E[z(t)z(s)]|` (which must vanish), over a set of
/// time pairs, from `n` sampled paths.
pub fn noise_covariance_z(p: &BathParams, n: u64) -> f64 {
    let grid = TimeGrid::span(3.0, 15).unwrap();
    let pairs = [(0usize, 0usize), (10, 0), (30, 30), (30, 20), (30, 0), (17, 4), (29, 1)];
    let mut sum = vec![(C64::new(0.0, 0.0), 0.0, 0.0, C64::new(0.0, 0.0), 0.0, 0.0); pairs.len()];
    for i in 0..n {
        let z = sample_noise_path(p, &grid, 2024, i).unwrap();
        for (acc, &(a, b)) in sum.iter_mut().zip(&pairs) {
            let v = z.samples[a] * z.samples[b].conj();
            let w = z.samples[a] * z.samples[b];
            acc.0 += v;
            acc.1 += v.re * v.re;
            acc.2 += v.im * v.im;
            acc.3 += w;
            acc.4 += w.re * w.re;
            acc.5 += w.im * w.im;
        }
    }
    let nf = n as f64;
    let z = |mean: f64, sq: f64, target: f64| {
        let var = (sq / nf - mean * mean) * nf / (nf - 1.0);
        (mean - target).abs() / (var / nf).sqrt()
    };
    let mut worst = 0.0f64;
    for (acc, &(a, b)) in sum.iter().zip(&pairs) {
        let want = kernel(p, grid.half_t(a), grid.half_t(b));
        let m = acc.0 / nf;
        let r = acc.3 / nf;
        worst = worst.max(z(m.re, acc.1, want.re)).max(z(m.im, acc.2, want.im));
        worst = worst.max(z(r.re, acc.4, 0.0)).max(z(r.im, acc.5, 0.0));
    }
    worst
}

/// Worst geodesic residual on a great circle and on an integrated geodesic,
/// and the worst accumulated connection along them.
pub fn geodesic_checks() -> (f64, f64) {
    let n = 400;
    let ds = PI / n as f64;
    let a = Ket::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0));
    let b = Ket::new(C64::new(0.0, 0.8), C64::new(0.6, 0.0), C64::new(0.0, 0.0));
    debug_assert!(geodec::linalg::braket(&a, &b).norm() < 1e-15);
    let circle: Vec<(Ket, Ket)> = (0..=n)
        .map(|k| {
            let s = k as f64 * ds;
            let v = a * C64::new(s.cos(), 0.0) + b * C64::new(s.sin(), 0.0);
            (v, v)
        })
        .collect();
    let integrated = integrate_geodesic(&a, &(b * C64::new(1.7, 0.0)), 0.005, 600);
    let mut res = 0.0f64;
    let mut acc = 0.0f64;
    for (path, step) in [(&circle, ds), (&integrated, 0.005)] {
        res = res.max(geodesic_residual(path, step).unwrap().into_iter().fold(0.0, f64::max));
        acc = acc.max(connection_accumulation(path, step).norm());
    }
    (res, acc)
}

/// Worst `|tr ρ̃ − 1|` over the deterministic `ρ̃` evolution of every model.
pub fn rho_tilde_trace() -> f64 {
    let mut worst = 0.0f64;
    for kind in KINDS {
        let m = model(kind, 1.0, 1.0, 2000);
        let s = evolve_rho_tilde(&m).unwrap();
        for r in s.rho.iter().chain(&s.mid) {
            worst = worst.max((r.trace() - 1.0).norm());
        }
    }
    worst
}

/// Whether ensemble means and standard errors are bit-identical across the
/// given thread counts.
pub fn thread_determinism(threads: &[usize]) -> bool {
    let m = model(ModelKind::Dissipative2L, 1.0, 1.0, 300);
    let run = |t: usize| {
        let mut o = EnsembleOptions::new(300, 31);
        o.threads = Some(t);
        average_phase_series(&m, &o).unwrap()
    };
    let base = run(threads[0]);
    threads[1..].iter().all(|&t| {
        let e = run(t);
        let same = |a: &[C64], b: &[C64]| a.iter().zip(b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
        same(&e.beta.mean, &base.beta.mean)
            && same(&e.beta_tot.mean, &base.beta_tot.mean)
            && e.beta.stderr.iter().zip(&base.beta.stderr).all(|(x, y)| x.to_bits() == y.to_bits())
    })
}
