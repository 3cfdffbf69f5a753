//! Large-`n` expansion of the log partition function `log Z_n`.

use serde::Serialize;

use crate::dd::{self, Dd};
use crate::ensemble::EnsembleParams;
use crate::error::{invalid, Error, Result};
use crate::specfun::{log_barnes_g, ZETA_PRIME_MINUS_ONE};

/// Default bound on `n₁, n₂` when `b = n₁/n₂`.
pub const DEFAULT_RATIONAL_CAP: u64 = 64;

const MAX_DENOMINATOR: u64 = 1_000_000;
const RATIONAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZnExpansion {
    pub n: usize,
    /// Expansion through `O(1)`; equals `without_constant` when the
    /// constant is unavailable.
    pub value: f64,
    pub without_constant: f64,
    pub constant: Option<f64>,
    /// `(n₁, n₂)` with `b = n₁/n₂` in lowest terms.
    pub rational: Option<(u64, u64)>,
    /// Set when `b` has no small rational representation, so the constant
    /// was left out.
    pub irrational: bool,
    /// Coefficient of the first omitted term, `n⁻¹`. It vanishes for
    /// `b = 1, α = 0` but not in general, in which case the remainder of
    /// `value` is `O(n⁻¹)` rather than `O(n⁻²)`.
    pub inverse_n_coefficient: f64,
}

/// Best rational approximation `p/q` of `x > 0` by continued fractions,
/// accepted when `|x − p/q| ≤ 1e-12·x` with `q ≤ 10⁶`.
pub fn rational_approximation(x: f64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e12 {
            return None;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > MAX_DENOMINATOR {
            return None;
        }
        if ((p2 as f64 / q2 as f64) - x).abs() <= RATIONAL_TOL * x {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = y - a as f64;
        if frac <= 0.0 {
            return None;
        }
        y = 1.0 / frac;
    }
    None
}

fn log_n_coefficient(b: f64, alpha: f64) -> f64 {
    (1.0 - 3.0 * b + b * b + 6.0 * alpha - 6.0 * b * alpha + 6.0 * alpha * alpha) / (12.0 * b)
}

/// Coefficient of `n⁻¹` in `log Z_n`, from Euler–Maclaurin summation of
/// Stirling's series: `(1 + 2α − b)(2α² − 2αb + 2α − b)/(24b)`.
pub fn inverse_n_coefficient(b: f64, alpha: f64) -> f64 {
    // `+ 0.0` clears a negative zero.
    (1.0 + 2.0 * alpha - b) * (2.0 * alpha * alpha - 2.0 * alpha * b + 2.0 * alpha - b) / (24.0 * b) + 0.0
}

/// The constant `𝔤(b, α)` for `b = n₁/n₂`.
pub fn barnes_constant(n1: u64, n2: u64, alpha: f64, cap: u64) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return invalid("b = n1/n2 needs positive n1 and n2");
    }
    if n1 > cap || n2 > cap {
        return Err(Error::CapExceeded { n1, n2, cap });
    }
    if !(alpha > -1.0) {
        return invalid(format!("alpha must exceed -1, got {alpha}"));
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let b = f1 / f2;
    let mut g = f1 * f2 * ZETA_PRIME_MINUS_ONE
        + (b * (f2 - f1) + 2.0 * f1 * alpha) / (4.0 * b) * (2.0 * std::f64::consts::PI).ln()
        - log_n_coefficient(b, alpha) * f1.ln();
    for j in 1..=n2 {
        for k in 1..=n1 {
            g -= log_barnes_g((j as f64 + alpha / b - 1.0) / f2 + k as f64 / f1)?;
        }
    }
    Ok(g)
}

/// Non-constant part of the expansion in double-double arithmetic.
fn expansion_dd(b: f64, alpha: f64, n: usize) -> Dd {
    let one = Dd::from_f64(1.0);
    let bd = Dd::from_f64(b);
    let ad = Dd::from_f64(alpha);
    let nf = Dd::from_f64(n as f64);
    let ln_n = nf.ln();
    let ln_b = bd.ln();
    let two_pi = dd::PI.mul_f64(2.0);
    let quad = -((Dd::from_f64(3.0) + ln_b.mul_f64(2.0)) / bd.mul_f64(4.0)) * nf * nf;
    let nlogn = -(nf * ln_n).mul_f64(0.5);
    let lin = two_pi.ln().mul_f64(0.5)
        + (bd - ad.mul_f64(2.0) - one) / bd.mul_f64(2.0) * (one + ln_b)
        + (dd::PI / bd).ln();
    let logc = (one - bd.mul_f64(3.0) + bd * bd + ad.mul_f64(6.0) - (bd * ad).mul_f64(6.0) + (ad * ad).mul_f64(6.0))
        / bd.mul_f64(12.0);
    quad + nlogn + lin * nf + logc * ln_n
}

pub fn zn_expansion(params: &EnsembleParams) -> Result<ZnExpansion> {
    zn_expansion_with_cap(params, DEFAULT_RATIONAL_CAP)
}

/// Expansion of `log Z_n` through `O(1)`, accurate to `O(n⁻²)`. Meaningful
/// for large `n` only; at `n = 1` compare with [`crate::exact::log_partition_exact`].
pub fn zn_expansion_with_cap(params: &EnsembleParams, cap: u64) -> Result<ZnExpansion> {
    params.validate()?;
    let without = expansion_dd(params.b, params.alpha, params.n).to_f64();
    let rational = rational_approximation(params.b);
    let constant = match rational {
        Some((n1, n2)) => Some(barnes_constant(n1, n2, params.alpha, cap)?),
        None => None,
    };
    Ok(ZnExpansion {
        n: params.n,
        value: without + constant.unwrap_or(0.0),
        without_constant: without,
        constant,
        rational,
        irrational: rational.is_none(),
        inverse_n_coefficient: inverse_n_coefficient(params.b, params.alpha),
    })
}

/// `log Z_n(exact) − expansion`, with both sides in double-double so the
/// `O(n⁻²)` remainder is resolved for `n` in the thousands.
pub fn zn_residual(params: &EnsembleParams, cap: u64) -> Result<f64> {
    let e = zn_expansion_with_cap(params, cap)?;
    let Some(g) = e.constant else {
        return invalid("the constant is only available for rational b");
    };
    let exact = crate::exact::log_partition_dd(params);
    Ok((exact - expansion_dd(params.b, params.alpha, params.n) - Dd::from_f64(g)).to_f64())
}
