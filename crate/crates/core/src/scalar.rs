//! Scalars shared by the real and complex code paths.
//!
//! The exact engine and the asymptotic coefficients are generic over this
//! trait so that derivatives in `u` can be checked by complex-step and
//! contour-integral differentiation.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Add<f64, Output = Self>
    + AddAssign
{
    fn from_f64(x: f64) -> Self;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn exp(self) -> Self;
    /// `eᶻ − 1` without cancellation near zero.
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    /// `ln(1 + z)` without cancellation near zero.
    fn ln_1p(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn from_parts(re: f64, im: f64) -> Self;
    fn norm(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn exp_m1(self) -> Self {
        // e^{x+iy} − 1 = (eˣ − 1)cos y − 2sin²(y/2) + i·eˣ sin y
        let (x, y) = (self.re, self.im);
        let half = (0.5 * y).sin();
        Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn ln_1p(self) -> Self {
        // |1 + z|² − 1 = 2x + x² + y², so the real part keeps full precision.
        let (x, y) = (self.re, self.im);
        let re = 0.5 * (x * (2.0 + x) + y * y).ln_1p();
        Complex64::new(re, y.atan2(1.0 + x))
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

/// Neumaier-compensated running sum, applied to real and imaginary parts
/// separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<S: Scalar>(&mut self, x: S) {
        neumaier(&mut self.re, x.re());
        neumaier(&mut self.im, x.im());
    }

    pub fn value<S: Scalar>(&self) -> S {
        S::from_parts(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Compensated sum of an iterator of reals.
pub fn sum_f64<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in it {
        acc.add(x);
    }
    acc.value()
}
