//! Small fixed-size complex linear algebra.
//!
//! Every model is embedded in a three-dimensional space; two-level models
//! leave the third basis state decoupled and unpopulated.

use nalgebra::{Matrix3, Vector3};

use crate::C64;

pub type Ket = Vector3<C64>;
pub type Op = Matrix3<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `⟨a|b⟩`, antilinear in the first argument.
#[inline]
pub fn braket(a: &Ket, b: &Ket) -> C64 {
    a.dotc(b)
}

/// `⟨a|M|b⟩`.
#[inline]
pub fn expect(a: &Ket, m: &Op, b: &Ket) -> C64 {
    a.dotc(&(m * b))
}

/// `|a⟩⟨b|`.
#[inline]
pub fn outer(a: &Ket, b: &Ket) -> Op {
    a * b.adjoint()
}

pub fn diag(a: C64, b: C64, d: C64) -> Op {
    Op::from_diagonal(&Ket::new(a, b, d))
}

/// Matrix unit `|row⟩⟨col|`.
pub fn unit(row: usize, col: usize) -> Op {
    let mut m = Op::zeros();
    m[(row, col)] = c(1.0);
    m
}

#[inline]
pub fn norm(v: &Ket) -> f64 {
    v.norm()
}
