//! Continuous tracking of complex arguments and helpers for the two-valued
//! square root in the phase definition.
//!
//! The argument is unwrapped step by step: each new principal value is joined
//! to the running total through the wrapped increment, so the tracked value is
//! continuous as long as the true per-step change stays below the jump limit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Wrap an angle into `(−π, π]`.
#[inline]
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Shift `x` by the integer multiple of π that brings it closest to `reference`.
///
/// Real parts of phases built from a square root are only defined modulo π;
/// this picks the representative on the sheet of `reference`.
#[inline]
pub fn nearest_sheet(x: f64, reference: f64) -> f64 {
    x - PI * ((x - reference) / PI).round()
}

/// Distance between `a` and `b` modulo π.
#[inline]
pub fn distance_mod_pi(a: f64, b: f64) -> f64 {
    (nearest_sheet(a, b) - b).abs()
}

/// Running unwrapper for the argument of a complex sequence.
#[derive(Clone, Debug)]
pub struct ArgUnwrapper {
    principal: f64,
    total: f64,
    max_step: f64,
}

impl ArgUnwrapper {
    /// Start from a value whose unwrapped argument is taken to be `start`.
    pub fn new(first: C64, start: f64, max_step: f64) -> Self {
        Self { principal: first.arg(), total: start, max_step }
    }

    /// Feed the next value; `time` is only used for error reporting.
    pub fn push(&mut self, z: C64, time: f64) -> Result<f64> {
        let a = z.arg();
        let step = wrap_pi(a - self.principal);
        if step.abs() >= self.max_step {
            return Err(Error::BranchJump { time, jump: step });
        }
        self.principal = a;
        self.total += step;
        Ok(self.total)
    }

    pub fn value(&self) -> f64 {
        self.total
    }
}

/// Unwrap a whole series starting at 0 for the first element.
pub fn unwrap_series(zs: &[C64], times: &[f64], max_step: f64) -> Result<Vec<f64>> {
    let Some(&first) = zs.first() else {
        return Ok(Vec::new());
    };
    let mut u = ArgUnwrapper::new(first, 0.0, max_step);
    let mut out = Vec::with_capacity(zs.len());
    out.push(0.0);
    for (z, t) in zs.iter().zip(times).skip(1) {
        out.push(u.push(*z, *t)?);
    }
    Ok(out)
}
