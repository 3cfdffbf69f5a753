//! Scalar special functions: `erfc`, `log Γ`, the regularized lower incomplete
//! gamma function with its uniform large-parameter regime, and `log G` (Barnes).
//!
//! Everything here is a pure function of its arguments.

mod barnes;
mod incgamma;

pub use barnes::{log_barnes_g, ZETA_PRIME_MINUS_ONE};
pub use incgamma::{
    eta_of_lambda, gamma_regime, reg_lower_gamma, reg_lower_gamma_in, temme_r, EtaValue,
    GammaRegime, ETA_SERIES_SWITCH, TEMME_MIN_A, TEMME_R_FLOOR, TEMME_TAYLOR_SWITCH,
};
pub(crate) use incgamma::reg_gamma_pair;

use crate::error::{Error, Result};

/// ½·ln(2π).
pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Complementary error function `(2/√π)∫_t^∞ e^{-x²} dx`.
pub fn erfc(t: f64) -> f64 {
    libm::erfc(t)
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "log_gamma",
            value: x,
            expected: "x > 0",
        });
    }
    Ok(libm::lgamma_r(x).0)
}

/// Remainder of Stirling's series, `ln Γ(x) − ((x − ½)ln x − x + ½ln 2π)`.
pub(crate) fn stirling_correction(x: f64) -> f64 {
    if x >= 10.0 {
        // 1/(12x) − 1/(360x³) + 1/(1260x⁵) − … ; next omitted term < 3e-17 at x = 10.
        const C: [f64; 7] = [
            1.0 / 12.0,
            -1.0 / 360.0,
            1.0 / 1260.0,
            -1.0 / 1680.0,
            1.0 / 1188.0,
            -691.0 / 360_360.0,
            1.0 / 156.0,
        ];
        let r = 1.0 / x;
        let r2 = r * r;
        let mut acc = 0.0;
        for c in C.iter().rev() {
            acc = acc * r2 + c;
        }
        acc * r
    } else {
        libm::lgamma_r(x).0 - ((x - 0.5) * x.ln() - x + HALF_LN_2PI)
    }
}

/// `x − ln(1 + x)` for `x > −1`, free of cancellation near `x = 0`.
pub(crate) fn x_minus_log1p(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // ln(1+x) = 2·atanh(y) with y = x/(2+x), and x − 2y = x²/(2+x).
        let y = x / (2.0 + x);
        let y2 = y * y;
        let mut power = y * y2;
        let mut k = 3.0;
        let mut sum = 0.0;
        loop {
            let t = power / k;
            sum += t;
            if t.abs() <= 1e-18 * sum.abs() {
                break;
            }
            power *= y2;
            k += 2.0;
        }
        x * x / (2.0 + x) - 2.0 * sum
    } else {
        x - x.ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn erfc_reference_values() {
        assert_eq!(erfc(0.0), 1.0);
        // 50-digit values from an mpmath oracle.
        assert!(rel(erfc(1.0), 0.157_299_207_050_285_130_658_779_364_917) < 1e-14);
        assert!(rel(erfc(-0.5), 1.520_499_877_813_046_537_682_746_653_89) < 1e-14);
        assert!(rel(erfc(3.0), 2.209_049_699_858_544_137_277_612_958_23e-5) < 1e-14);
        assert!(rel(erfc(10.0), 2.088_487_583_762_544_757_000_786_294_96e-45) < 1e-14);
        assert_eq!(erfc(f64::INFINITY), 0.0);
        assert_eq!(erfc(f64::NEG_INFINITY), 2.0);
    }

    #[test]
    fn erfc_reflection_and_monotonicity() {
        let mut prev = 2.0;
        for i in -600..=600 {
            let t = i as f64 / 100.0;
            let v = erfc(t);
            assert!((v + erfc(-t) - 2.0).abs() <= 1e-14);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn log_gamma_reference_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        let cases = [
            (0.5, 0.572_364_942_924_700_087_071_713_675_677),
            (10.0, 12.801_827_480_081_469_611_207_717_874_6),
            (1e-8, 18.420_680_738_180_208_884_452_745_022_2),
            (0.1, 2.252_712_651_734_205_902_006_237_956_9),
            (1.5, -0.120_782_237_635_245_222_345_518_445_782),
            (2.5, 0.284_682_870_472_919_159_632_494_669_683),
            (7.25, 7.052_185_450_738_539_444_925_749_253_13),
            (123.4, 469.336_097_442_190_585_794_287_304_43),
            (1e5, 1_051_287.708_973_656_894_900_858_018_25),
        ];
        for (x, want) in cases {
            assert!(rel(log_gamma(x).unwrap(), want) < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn log_gamma_domain() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn stirling_branches_meet() {
        let below = libm::lgamma_r(10.0).0 - (9.5 * 10f64.ln() - 10.0 + HALF_LN_2PI);
        assert!((stirling_correction(10.0) - below).abs() < 1e-15);
    }

    #[test]
    fn x_minus_log1p_matches_direct_form_away_from_zero() {
        for &x in &[-0.9, -0.49, -0.3, 0.2, 0.49, 0.51, 3.0] {
            let direct = x - f64::ln_1p(x);
            assert!(rel(x_minus_log1p(x), direct) < 1e-13, "x = {x}");
        }
        let x: f64 = 1e-6;
        let series = x * x / 2.0 - x * x * x / 3.0 + x.powi(4) / 4.0;
        assert!(rel(x_minus_log1p(x), series) < 1e-15);
        assert_eq!(x_minus_log1p(0.0), 0.0);
    }
}
