//! Fixed-step classical fourth-order Runge–Kutta integration.
//!
//! Two drivers: [`rk4_path`] for right-hand sides that can be evaluated at
//! any time, and [`rk4_half_grid`] for right-hand sides that are only known on
//! the half-step grid (sampled noise, tabulated coefficients). The latter also
//! reports a midpoint value per step from the standard third-order dense-output
//! interpolant of the classical scheme.

use crate::error::Result;

/// State vector of an ODE; only needs `self + a·x`.
pub trait OdeState: Clone {
    fn add_scaled(&self, a: f64, x: &Self) -> Self;
}

impl OdeState for crate::C64 {
    #[inline]
    fn add_scaled(&self, a: f64, x: &Self) -> Self {
        self + x * a
    }
}

impl OdeState for crate::linalg::Ket {
    #[inline]
    fn add_scaled(&self, a: f64, x: &Self) -> Self {
        self + x * crate::linalg::c(a)
    }
}

impl OdeState for crate::linalg::Op {
    #[inline]
    fn add_scaled(&self, a: f64, x: &Self) -> Self {
        self + x * crate::linalg::c(a)
    }
}

impl<A: OdeState, B: OdeState> OdeState for (A, B) {
    #[inline]
    fn add_scaled(&self, a: f64, x: &Self) -> Self {
        (self.0.add_scaled(a, &x.0), self.1.add_scaled(a, &x.1))
    }
}

/// Integrate `y' = f(t, y)` with `n` steps of size `h` from `t0`, returning all
/// `n + 1` points.
pub fn rk4_path<S, F>(t0: f64, h: f64, n: usize, y0: S, mut f: F) -> Vec<S>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push(y.clone());
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &y.add_scaled(0.5 * h, &k1));
        let k3 = f(t + 0.5 * h, &y.add_scaled(0.5 * h, &k2));
        let k4 = f(t + h, &y.add_scaled(h, &k3));
        y = y
            .add_scaled(h / 6.0, &k1)
            .add_scaled(h / 3.0, &k2)
            .add_scaled(h / 3.0, &k3)
            .add_scaled(h / 6.0, &k4);
        out.push(y.clone());
    }
    out
}

/// Integrate `y' = f(j, y)` over `n_steps` full steps of size `dt`, where `j`
/// indexes the half-step grid (`j = 2k` start, `2k + 1` midpoint, `2k + 2`
/// end of step `k`).
///
/// `on_step(k, mid, next)` is called after each step with the dense-output
/// midpoint and the new state; returning an error aborts the integration.
pub fn rk4_half_grid<S, F, O>(n_steps: usize, dt: f64, y0: S, mut f: F, mut on_step: O) -> Result<S>
where
    S: OdeState,
    F: FnMut(usize, &S) -> S,
    O: FnMut(usize, &S, &S) -> Result<()>,
{
    let mut y = y0;
    for k in 0..n_steps {
        let (j0, jm, j1) = (2 * k, 2 * k + 1, 2 * k + 2);
        let k1 = f(j0, &y);
        let k2 = f(jm, &y.add_scaled(0.5 * dt, &k1));
        let k3 = f(jm, &y.add_scaled(0.5 * dt, &k2));
        let k4 = f(j1, &y.add_scaled(dt, &k3));
        let mid = y
            .add_scaled(dt * 5.0 / 24.0, &k1)
            .add_scaled(dt / 6.0, &k2)
            .add_scaled(dt / 6.0, &k3)
            .add_scaled(-dt / 24.0, &k4);
        y = y
            .add_scaled(dt / 6.0, &k1)
            .add_scaled(dt / 3.0, &k2)
            .add_scaled(dt / 3.0, &k3)
            .add_scaled(dt / 6.0, &k4);
        on_step(k, &mid, &y)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn exponential_is_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let path = rk4_path(0.0, h, n, C64::new(1.0, 0.0), |_, y| y * C64::new(-1.0, 2.0));
            (path[n] - C64::new(-1.0, 2.0).exp()).norm()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn half_grid_midpoint_is_third_order_accurate() {
        // y' = cos(t) y with f tabulated on the half grid
        let dt = 0.05;
        let n = 40;
        let a = |j: usize| (j as f64 * dt / 2.0).cos();
        let mut max_mid_err: f64 = 0.0;
        rk4_half_grid(n, dt, C64::new(1.0, 0.0), |j, y| y * a(j), |k, mid, _| {
            let tm = (k as f64 + 0.5) * dt;
            max_mid_err = max_mid_err.max((mid - C64::new(tm.sin().exp(), 0.0)).norm());
            Ok(())
        })
        .unwrap();
        assert!(max_mid_err < 1e-6, "{max_mid_err}");
    }
}
