//! Double-double arithmetic (about 32 significant digits).
//!
//! Only used where a result is a small difference of two quantities of size
//! `10⁷` or more, such as `ln Z_n` minus its large-`n` expansion.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::specfun::stirling_correction;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const LN2: Dd = Dd::new(std::f64::consts::LN_2, 2.3190468138462996e-17);
pub const PI: Dd = Dd::new(std::f64::consts::PI, 1.2246467991473532e-16);
pub const HALF_LN_2PI: Dd = Dd::new(0.9189385332046728, -3.8782941580672414e-17);
pub const ZETA_PRIME_MINUS_ONE: Dd = Dd::new(-0.16542114370045094, 1.0747835010305763e-17);

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd::new(self.hi * s, self.lo * s)
    }

    pub fn exp(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::from_f64(1.0);
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-10);
        // Taylor series of e^r − 1 for |r| < 3.4e-4.
        let mut term = r;
        let mut sum = r;
        for i in 2..=12 {
            term = (term * r) / Dd::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        // (1 + s)² − 1 = s(2 + s), repeated ten times.
        for _ in 0..10 {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        (sum + Dd::from_f64(1.0)).ldexp(k as i32)
    }

    /// Natural logarithm by one Newton step on `exp`, for `self > 0`.
    pub fn ln(self) -> Dd {
        let y = Dd::from_f64(self.hi.ln());
        y + self * (-y).exp() - Dd::from_f64(1.0)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd::new(hi, lo) + Dd::from_f64(q3)
    }
}

/// `ln Γ(x)` for `x > 0` in double-double. The argument is shifted to
/// `x ≥ 20`, where the Stirling remainder is below `1/240` and is carried in
/// plain double precision.
pub fn log_gamma(x: Dd) -> Dd {
    let mut shift = Dd::default();
    let mut x = x;
    while x.hi < 20.0 {
        shift = shift + x.ln();
        x = x + Dd::from_f64(1.0);
    }
    let main = (x - Dd::from_f64(0.5)) * x.ln() - x + HALF_LN_2PI;
    main + Dd::from_f64(stirling_correction(x.to_f64())) - shift
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        (a - b).to_f64().abs() <= tol * b.hi.abs().max(1.0)
    }

    #[test]
    fn constants_are_consistent() {
        assert!(close(Dd::from_f64(2.0).ln(), LN2, 1e-31));
        assert!(close(PI.ln(), Dd::new(1.1447298858494002, 1.0265951162707826e-17), 1e-26));
    }

    #[test]
    fn exp_and_ln_reference_values() {
        // 50-digit values from mpmath.
        let e = Dd::from_f64(3.5).exp();
        assert!(close(e, Dd::new(33.11545195869231, 2.2435601403927554e-15), 1e-26));
        let l = Dd::from_f64(7.0).ln();
        assert!(close(l, Dd::new(1.9459101490553132, 7.323586207904907e-17), 1e-26));
        let x = Dd::new(12345.678, 1e-13);
        assert!(close(x.ln().exp(), x, 1e-26));
    }

    #[test]
    fn division_round_trips() {
        let a = Dd::new(1.0, 1e-20);
        let b = Dd::from_f64(3.0);
        assert!(close((a / b) * b, a, 1e-31));
    }

    #[test]
    fn log_gamma_reference_values() {
        // Limited by the Stirling remainder, held in double precision.
        let g = log_gamma(Dd::from_f64(123.4));
        assert!((g - Dd::new(469.3360974421906, 7.772450604511947e-15)).to_f64().abs() < 1e-19);
        let g = log_gamma(Dd::from_f64(0.75));
        assert!((g - Dd::new(0.20328095143129538, -4.327183682604757e-18)).to_f64().abs() < 2e-18);
    }

    #[test]
    fn summed_log_gamma_keeps_digits() {
        let mut s = Dd::default();
        for j in 1..=2000 {
            s = s + log_gamma(Dd::from_f64(j as f64));
        }
        let want = Dd::new(12203641.99732089, 6.044991674437659e-10);
        assert!((s - want).to_f64().abs() < 1e-15, "{:?}", s - want);
    }
}
