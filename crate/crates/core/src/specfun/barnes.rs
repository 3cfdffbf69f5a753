//! Barnes G-function on the positive real axis.

use super::{HALF_LN_2PI, log_gamma};
use crate::error::{Error, Result};

/// ζ′(−1) = 1/12 − ln A (A the Glaisher–Kinkelin constant), to 35 digits:
/// −0.16542114370045092921391966024278064 (mpmath `zeta(-1, derivative=1)`).
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_929_213_919_660_242_780_64;

/// Shift target for the asymptotic expansion.
const ASYMPTOTIC_MIN: f64 = 20.0;

/// `B_{2k+2}/(4k(k+1))` for k = 1..8.
const TAIL: [f64; 8] = [
    (-1.0 / 30.0) / 8.0,
    (1.0 / 42.0) / 24.0,
    (-1.0 / 30.0) / 48.0,
    (5.0 / 66.0) / 80.0,
    (-691.0 / 2730.0) / 120.0,
    (7.0 / 6.0) / 168.0,
    (-3617.0 / 510.0) / 224.0,
    (43867.0 / 798.0) / 288.0,
];

/// `ln G(1 + y)` for large `y`.
fn log_g_asymptotic(y: f64) -> f64 {
    let ly = y.ln();
    let r2 = 1.0 / (y * y);
    let mut tail = 0.0;
    for c in TAIL.iter().rev() {
        tail = (tail + c) * r2;
    }
    0.5 * y * y * ly - 0.75 * y * y + y * HALF_LN_2PI - ly / 12.0 + ZETA_PRIME_MINUS_ONE + tail
}

/// `ln G(z)` for `z > 0`, using `G(z + 1) = Γ(z)G(z)` to shift into the
/// range of the asymptotic expansion.
pub fn log_barnes_g(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain {
            function: "log_barnes_g",
            value: z,
            expected: "z > 0",
        });
    }
    if z.fract() == 0.0 && z <= 1000.0 {
        // G(k) = ∏_{j=1}^{k-2} j!
        let k = z as u64;
        let mut acc = 0.0;
        let mut log_fact = 0.0;
        for j in 1..k.saturating_sub(1) {
            log_fact += (j as f64).ln();
            acc += log_fact;
        }
        return Ok(acc);
    }
    let shift = (ASYMPTOTIC_MIN + 1.0 - z).ceil().max(0.0) as usize;
    let w = z + shift as f64;
    let mut value = log_g_asymptotic(w - 1.0);
    for k in 0..shift {
        value -= log_gamma(z + k as f64)?;
    }
    Ok(value)
}
