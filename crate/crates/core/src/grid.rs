//! Uniform time grids with half-step resolution.

use crate::error::{Error, Result};

/// Uniform time grid `t_k = t0 + k·dt`, `k = 0..=n_steps`.
///
/// Noise samples and Ō coefficients live on the half-step grid
/// `t0 + j·dt/2`, `j = 0..=2·n_steps`, so that every Runge–Kutta stage of a
/// full step lands exactly on a sample point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() || !dt.is_finite() {
            return Err(Error::InvalidGrid("non-finite t0 or dt".into()));
        }
        if dt <= 0.0 {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be >= 1".into()));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid on `[0, t_final]` with `n_steps` equal steps.
    pub fn span(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(Error::InvalidGrid(format!("t_final must be > 0, got {t_final}")));
        }
        Self::new(0.0, t_final / n_steps as f64, n_steps)
    }

    /// Grid on `[0, t_final]` whose step is as close as possible to `dt`
    /// without exceeding it.
    pub fn covering(t_final: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {dt}")));
        }
        let n = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
        Self::span(t_final, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of full-grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of half-grid points, `2·n_steps + 1`.
    pub fn half_len(&self) -> usize {
        2 * self.n_steps + 1
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Time of half-grid point `j` (`j = 2k` is full-grid point `k`).
    pub fn half_t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * (0.5 * self.dt)
    }

    pub fn t_final(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.t(k))
    }

    pub fn half_times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.half_len()).map(move |j| self.half_t(j))
    }

    /// The first `n_steps` steps of this grid.
    pub fn truncated(&self, n_steps: usize) -> Result<Self> {
        Self::new(self.t0, self.dt, n_steps.min(self.n_steps))
    }

    /// Same spacing with twice the resolution (`dt/2`, `2·n_steps`).
    pub fn refined(&self) -> Self {
        Self { t0: self.t0, dt: 0.5 * self.dt, n_steps: 2 * self.n_steps }
    }
}
