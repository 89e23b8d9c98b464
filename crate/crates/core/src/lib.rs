//! Stochastic pure-state trajectories of non-Markovian open quantum systems and
//! the complex-valued geometric phases they carry.
//!
//! A trajectory pair `|ψ(t)⟩`, `|ψ̃(t)⟩` is propagated under the quantum state
//! diffusion (QSD) generator and its adjoint, driven by colored complex Gaussian
//! noise with an exponential (Ornstein–Uhlenbeck) bath correlation function.
//! From the pair we extract the complex total, dynamical and geometric phases,
//! average them over an ensemble, and compare against closed-form expressions
//! for three built-in models:
//!
//! * a dissipative two-level system (`L = λσ₋`),
//! * a pure-dephasing two-level system (`L = λσ_z`),
//! * a three-level system with a leakage elimination operator (LEO) control.
//!
//! The crate is organised bottom-up: [`bath`] (kernel and noise), [`models`]
//! (Hamiltonians and Ō-operator coefficients), [`dynamics`] (pair propagation),
//! [`geomphase`] (phase extraction), [`ensemble`] (Monte Carlo averaging and
//! the deterministic `ρ̃` equation), [`closedform`] (analytic oracles),
//! [`control`] (the LEO experiment) and [`cli`] (configuration and CSV output).

pub mod bath;
pub mod cli;
pub mod closedform;
pub mod control;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod geomphase;
pub mod grid;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod unwrap;

pub use error::{Error, Result};
pub use grid::TimeGrid;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
