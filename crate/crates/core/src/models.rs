//! The three built-in open-system models and their Ō-operator coefficients.
//!
//! Every model is stored as a half-step table of the noise-free drift
//! `D(t) = −iH_s(t) − L†Ō(t)` together with the coupling `L`, so the
//! trajectory generator at half-step `j` is `D_j + z*_j L`.

use std::fmt;
use std::str::FromStr;

use crate::bath::{kernel_integral, BathParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{c, diag, unit, Ket, Op, I};
use crate::ode::rk4_path;
use crate::C64;

/// Magnitude above which an Ō coefficient counts as blown up.
pub const BLOWUP_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Two-level system with `L = λσ₋`.
    Dissipative2L,
    /// Two-level system with `L = λσ_z`.
    Dephasing2L,
    /// Three-level system with `L = λ(|3⟩⟨1| + |3⟩⟨2|)` and LEO control.
    Leo3L,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dissipative2L => "dissipative",
            ModelKind::Dephasing2L => "dephasing",
            ModelKind::Leo3L => "leo",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ModelKind::Leo3L => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dissipative" | "dissipative2l" => Ok(ModelKind::Dissipative2L),
            "dephasing" | "dephasing2l" => Ok(ModelKind::Dephasing2L),
            "leo" | "leo3l" => Ok(ModelKind::Leo3L),
            other => Err(format!("unknown model `{other}` (expected dissipative, dephasing or leo)")),
        }
    }
}

/// LEO control field `c(t) = c_x·(1 + sin Ω_c t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlField {
    pub c_x: f64,
    pub omega_c: f64,
}

impl ControlField {
    pub const OFF: ControlField = ControlField { c_x: 0.0, omega_c: 0.0 };

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.c_x * (1.0 + (self.omega_c * t).sin())
    }

    /// `∫₀ᵗ c(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        if self.omega_c == 0.0 {
            return self.c_x * t;
        }
        self.c_x * (t + (1.0 - (self.omega_c * t).cos()) / self.omega_c)
    }
}

/// Ō coefficients on the half-step grid.
#[derive(Debug, Clone, PartialEq)]
pub enum ObarCoeffs {
    /// `Ō = F(t)σ₋`.
    Dissipative(Vec<C64>),
    /// `Ō = λA(t)σ_z`; stores `λA`.
    Dephasing(Vec<C64>),
    /// `Ō = F₁|3⟩⟨1| + F₂|3⟩⟨2|`.
    Leo(Vec<C64>, Vec<C64>),
}

fn check_blowup(what: &'static str, h: f64, t0: f64, series: &[C64]) -> Result<()> {
    match series.iter().position(|f| !(f.norm() <= BLOWUP_LIMIT)) {
        Some(j) => Err(Error::BlowUp { what, time: t0 + j as f64 * h, magnitude: series[j].norm() }),
        None => Ok(()),
    }
}

fn check_physical(omega: f64, lambda: f64) -> Result<()> {
    if !omega.is_finite() {
        return Err(Error::param("omega", "must be finite"));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Dissipative Riccati coefficient `F` on the half-step grid:
/// `Ḟ = α(0)λ − [γ + i(ω₀ − ω)]F + λF²`, `F(0) = 0`.
pub fn solve_dissipative_f(omega: f64, lambda: f64, bath: &BathParams, grid: &TimeGrid) -> Result<Vec<C64>> {
    check_physical(omega, lambda)?;
    bath.validate()?;
    let drive = c(bath.alpha0() * lambda);
    let damp = C64::new(bath.gamma, bath.omega0 - omega);
    let h = 0.5 * grid.dt();
    let f = rk4_path(grid.t0(), h, 2 * grid.n_steps(), c(0.0), |_, f: &C64| drive - damp * f + lambda * f * f);
    check_blowup("F", h, grid.t0(), &f)?;
    Ok(f)
}

/// LEO coefficients `(F₁, F₂)` on the half-step grid.
pub fn solve_leo_f(
    omega: f64,
    lambda: f64,
    bath: &BathParams,
    control: &ControlField,
    grid: &TimeGrid,
) -> Result<(Vec<C64>, Vec<C64>)> {
    check_physical(omega, lambda)?;
    bath.validate()?;
    let drive = c(bath.alpha0() * lambda);
    let h = 0.5 * grid.dt();
    let path = rk4_path(grid.t0(), h, 2 * grid.n_steps(), (c(0.0), c(0.0)), |t, y: &(C64, C64)| {
        let (f1, f2) = *y;
        let common = C64::new(2.0 * bath.gamma, 2.0 * (bath.omega0 - control.eval(t)));
        let s = 2.0 * lambda * (f1 + f2) - common;
        (drive + 0.5 * f1 * (s + I * omega), drive + 0.5 * f2 * (s - I * omega))
    });
    let (f1, f2): (Vec<C64>, Vec<C64>) = path.into_iter().unzip();
    check_blowup("F1", h, grid.t0(), &f1)?;
    check_blowup("F2", h, grid.t0(), &f2)?;
    Ok((f1, f2))
}

/// A fully tabulated model on a fixed grid.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub omega: f64,
    pub lambda: f64,
    pub bath: BathParams,
    pub theta: f64,
    pub control: Option<ControlField>,
    pub grid: TimeGrid,
    pub obar: ObarCoeffs,
    coupling: Op,
    l_dag_obar: Vec<Op>,
    drift: Vec<Op>,
}

/// Assemble a model, solving for its Ō coefficients on `grid`.
pub fn build_model(
    kind: ModelKind,
    omega: f64,
    lambda: f64,
    bath: BathParams,
    theta: f64,
    control: Option<ControlField>,
    grid: TimeGrid,
) -> Result<ModelSpec> {
    check_physical(omega, lambda)?;
    bath.validate()?;
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::param("theta", format!("must lie in [0, pi], got {theta}")));
    }
    match (kind, control) {
        (ModelKind::Leo3L, None) => return Err(Error::param("control", "the leo model needs a control field")),
        (ModelKind::Leo3L, Some(cf)) if !(cf.c_x.is_finite() && cf.omega_c.is_finite()) => {
            return Err(Error::param("control", "c_x and Omega_c must be finite"))
        }
        (ModelKind::Dissipative2L | ModelKind::Dephasing2L, Some(_)) => {
            return Err(Error::param("control", format!("control only applies to the leo model, not {kind}")))
        }
        _ => {}
    }

    let p2 = diag(c(1.0), c(1.0), c(0.0));
    let (coupling, obar, l_dag_obar): (Op, ObarCoeffs, Vec<Op>) = match kind {
        ModelKind::Dissipative2L => {
            let f = solve_dissipative_f(omega, lambda, &bath, &grid)?;
            let ldo = f.iter().map(|fj| unit(0, 0) * (lambda * fj)).collect();
            (unit(1, 0) * c(lambda), ObarCoeffs::Dissipative(f), ldo)
        }
        ModelKind::Dephasing2L => {
            let la: Vec<C64> = grid.half_times().map(|t| lambda * kernel_integral(&bath, t - grid.t0())).collect();
            let ldo = la.iter().map(|a| p2 * (lambda * a)).collect();
            (diag(c(lambda), c(-lambda), c(0.0)), ObarCoeffs::Dephasing(la), ldo)
        }
        ModelKind::Leo3L => {
            let cf = control.expect("checked above");
            let (f1, f2) = solve_leo_f(omega, lambda, &bath, &cf, &grid)?;
            let ldo = f1
                .iter()
                .zip(&f2)
                .map(|(a, b)| {
                    let mut m = Op::zeros();
                    m[(0, 0)] = lambda * a;
                    m[(0, 1)] = lambda * b;
                    m[(1, 0)] = lambda * a;
                    m[(1, 1)] = lambda * b;
                    m
                })
                .collect();
            ((unit(2, 0) + unit(2, 1)) * c(lambda), ObarCoeffs::Leo(f1, f2), ldo)
        }
    };

    let mut spec = ModelSpec {
        kind,
        omega,
        lambda,
        bath,
        theta,
        control,
        grid,
        obar,
        coupling,
        l_dag_obar,
        drift: Vec::new(),
    };
    spec.drift = (0..grid.half_len()).map(|j| spec.hamiltonian(grid.half_t(j)) * -I - spec.l_dag_obar[j]).collect();
    Ok(spec)
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// `[cos θ/2, sin θ/2, 0]`.
    pub fn initial_state(&self) -> Ket {
        Ket::new(c((0.5 * self.theta).cos()), c((0.5 * self.theta).sin()), c(0.0))
    }

    /// System Hamiltonian `H_s(t) = H₀ + R(t)`.
    pub fn hamiltonian(&self, t: f64) -> Op {
        let r = self.control.map_or(0.0, |cf| cf.eval(t));
        diag(c(0.5 * self.omega + r), c(-0.5 * self.omega + r), c(0.0))
    }

    /// Coupling operator `L`.
    pub fn coupling(&self) -> &Op {
        &self.coupling
    }

    /// `L†Ō` at half-step `j`.
    #[inline]
    pub fn l_dag_obar(&self, j: usize) -> &Op {
        &self.l_dag_obar[j]
    }

    /// Noise-free drift `−iH_s − L†Ō` at half-step `j`.
    #[inline]
    pub fn drift(&self, j: usize) -> &Op {
        &self.drift[j]
    }

    /// Full generator `D_j + z*L` for the trajectory `|ψ⟩`.
    #[inline]
    pub fn generator(&self, j: usize, z: C64) -> Op {
        self.drift[j] + self.coupling * z.conj()
    }

    /// Schrödinger-form non-Hermitian Hamiltonian `K = iG` at half-step `j`.
    #[inline]
    pub fn effective_hamiltonian(&self, j: usize, z: C64) -> Op {
        self.generator(j, z) * I
    }

    /// The Ō coefficient that multiplies the model's fixed operator
    /// (`F`, `λA` or `F₁`), on the half-step grid.
    pub fn primary_coeff(&self) -> &[C64] {
        match &self.obar {
            ObarCoeffs::Dissipative(f) | ObarCoeffs::Dephasing(f) | ObarCoeffs::Leo(f, _) => f,
        }
    }

    /// The same model without the bath and without control.
    pub fn closed_counterpart(&self) -> Result<ModelSpec> {
        let control = self.control.map(|_| ControlField::OFF);
        build_model(self.kind, self.omega, 0.0, self.bath, self.theta, control, self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t: f64, dt: f64) -> TimeGrid {
        TimeGrid::covering(t, dt).unwrap()
    }

    // five-point centered finite-difference residual of a half-grid series
    fn fd_residual(series: &[C64], h: f64, rhs: impl Fn(usize, C64) -> C64) -> f64 {
        (2..series.len() - 2)
            .map(|j| {
                let d = (series[j - 2] - 8.0 * series[j - 1] + 8.0 * series[j + 1] - series[j + 2]) / (12.0 * h);
                (d - rhs(j, series[j])).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn dissipative_f_starts_at_zero_and_satisfies_ode() {
        let bath = BathParams::default();
        let g = grid(2.0, 1e-3);
        let f = solve_dissipative_f(1.0, 1.0, &bath, &g).unwrap();
        assert_eq!(f[0], c(0.0));
        let damp = C64::new(1.0, -1.0);
        let res = fd_residual(&f, g.dt() / 2.0, |_, y| 0.5 - damp * y + y * y);
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn dissipative_f_small_time_series() {
        let bath = BathParams::new(1.3, 1.0, 0.2).unwrap();
        let g = TimeGrid::span(1e-4, 1).unwrap();
        let f = solve_dissipative_f(1.0, 0.8, &bath, &g).unwrap();
        let a = bath.alpha0() * 0.8;
        let k = C64::new(1.3, 0.2 - 1.0);
        let t = 1e-4;
        let series = a * t - k * a * t * t / 2.0;
        assert!((f[2] - series).norm() < 1e-12);
    }

    #[test]
    fn dissipative_f_markov_limit() {
        let bath = BathParams::new(200.0, 1.0, 0.0).unwrap();
        let g = TimeGrid::span(1.0, 4000).unwrap();
        let f = solve_dissipative_f(1.0, 1.0, &bath, &g).unwrap();
        assert!((f.last().unwrap() - 0.5).norm() < 0.005);
    }

    #[test]
    fn blowup_is_reported() {
        let bath = BathParams::new(0.01, 100.0, 0.0).unwrap();
        let g = TimeGrid::span(20.0, 2000).unwrap();
        let err = solve_dissipative_f(0.0, 5.0, &bath, &g).unwrap_err();
        assert!(matches!(err, Error::BlowUp { what: "F", .. }));
    }

    #[test]
    fn leo_symmetric_without_splitting() {
        let bath = BathParams::new(0.3, 1.0, 0.0).unwrap();
        let cf = ControlField { c_x: 3.0, omega_c: 7.0 };
        let (f1, f2) = solve_leo_f(0.0, 1.0, &bath, &cf, &grid(1.0, 1e-3)).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(f1[0], c(0.0));
    }

    #[test]
    fn leo_f_satisfies_ode_and_step_halving() {
        let bath = BathParams::new(0.3, 1.0, 0.0).unwrap();
        let cf = ControlField { c_x: 10.0, omega_c: 50.0 };
        let t = std::f64::consts::TAU;
        let g = TimeGrid::span(t, 20000).unwrap();
        let (f1, f2) = solve_leo_f(1.0, 1.0, &bath, &cf, &g).unwrap();
        let (h1, h2) = solve_leo_f(1.0, 1.0, &bath, &cf, &g.refined()).unwrap();
        let n = f1.len() - 1;
        assert!((f1[n] - h1[2 * n]).norm() < 1e-6);
        assert!((f2[n] - h2[2 * n]).norm() < 1e-6);
        for k in (0..=n).step_by(997) {
            assert!((f1[k] - h1[2 * k]).norm() < 1e-6);
        }
        let g = TimeGrid::covering(t, 1e-3).unwrap();
        let (f1, f2) = solve_leo_f(1.0, 1.0, &bath, &cf, &g).unwrap();
        let h = g.dt() / 2.0;
        let res = fd_residual(&f1, h, |j, y| {
            let s = 2.0 * (y + f2[j]) - C64::new(0.6, -2.0 * cf.eval(j as f64 * h));
            0.15 + 0.5 * y * (s + I)
        });
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn build_model_delegates_and_validates() {
        let g = grid(1.0, 1e-2);
        let bath = BathParams::default();
        let m = build_model(ModelKind::Dissipative2L, 1.0, 1.0, bath, 1.0, None, g).unwrap();
        let f = solve_dissipative_f(1.0, 1.0, &bath, &g).unwrap();
        assert_eq!(m.obar, ObarCoeffs::Dissipative(f));
        let d = build_model(ModelKind::Dephasing2L, 1.0, 1.0, bath, 1.0, None, g).unwrap();
        assert_eq!(d.primary_coeff()[0], c(0.0));
        assert!((d.primary_coeff()[7] - kernel_integral(&bath, g.half_t(7))).norm() < 1e-15);

        assert!(build_model(ModelKind::Dephasing2L, 1.0, 1.0, bath, 3.2, None, g).is_err());
        assert!(build_model(ModelKind::Dephasing2L, 1.0, 1.0, bath, 1.0, Some(ControlField::OFF), g).is_err());
        assert!(build_model(ModelKind::Leo3L, 1.0, 1.0, bath, 1.0, None, g).is_err());
        assert!(build_model(ModelKind::Leo3L, 1.0, -1.0, bath, 1.0, Some(ControlField::OFF), g).is_err());
    }

    #[test]
    fn zero_control_leaves_bare_hamiltonian() {
        let g = grid(1.0, 1e-2);
        let m = build_model(ModelKind::Leo3L, 1.0, 1.0, BathParams::default(), 1.2, Some(ControlField::OFF), g).unwrap();
        assert_eq!(m.hamiltonian(0.37), diag(c(0.5), c(-0.5), c(0.0)));
        assert_eq!(m.initial_state()[2], c(0.0));
        assert!((m.initial_state().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn control_field_integral() {
        let cf = ControlField { c_x: 2.0, omega_c: 3.0 };
        assert_eq!(cf.eval(0.0), 2.0);
        let n = 10000;
        let t = 1.7;
        let h = t / n as f64;
        let trap: f64 = (0..n).map(|k| 0.5 * h * (cf.eval(k as f64 * h) + cf.eval((k + 1) as f64 * h))).sum();
        assert!((trap - cf.integral(t)).abs() < 1e-6);
    }
}
