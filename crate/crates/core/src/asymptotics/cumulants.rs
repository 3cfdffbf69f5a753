//! Large-`n` coefficients of single-disk cumulants,
//! `κ_j = leading·n + c_j√n + d_j + e_j/√n + O((ln n)²/n)`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use super::functions::{UDerivatives, FRAC_1_SQRT_PI, MAX_DERIVATIVE};
use crate::ensemble::{critical_radius, Regime};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_pieces, truncation, QuadOptions};
use crate::specfun::erfc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantSeries {
    pub regime: Regime,
    pub order: usize,
    /// Coefficient of `n` (non-zero only for `j = 1` in the bulk and edge... and outside).
    pub leading: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub quad_error: f64,
}

impl CumulantSeries {
    /// `leading·n + c√n + d + e/√n`.
    pub fn evaluate(&self, n: f64) -> f64 {
        let sq = n.sqrt();
        self.leading * n + self.c * sq + self.d + self.e / sq
    }
}

fn check_order(j: usize) -> Result<()> {
    if j == 0 {
        return invalid("cumulant order must be at least 1");
    }
    if j > MAX_DERIVATIVE {
        return Err(Error::OrderTooHigh {
            order: j,
            max: MAX_DERIVATIVE,
        });
    }
    Ok(())
}

fn check_b_alpha(b: f64, alpha: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() || !(alpha > -1.0) || !alpha.is_finite() {
        return invalid(format!("need b > 0 and alpha > -1, got b = {b}, alpha = {alpha}"));
    }
    Ok(())
}

pub fn bulk_cumulant_coeffs(j: usize, b: f64, alpha: f64, r: f64) -> Result<CumulantSeries> {
    bulk_cumulant_coeffs_with(j, b, alpha, r, &QuadOptions::default())
}

/// Bulk coefficients (`0 < r < b^{−1/(2b)}`), from the `u`-derivatives of
/// the integrands of `C₂ … C₄`.
pub fn bulk_cumulant_coeffs_with(j: usize, b: f64, alpha: f64, r: f64, opts: &QuadOptions) -> Result<CumulantSeries> {
    check_order(j)?;
    check_b_alpha(b, alpha)?;
    if !(r > 0.0 && r < critical_radius(b)) {
        return invalid(format!("bulk radius must lie in (0, {}), got {r}", critical_radius(b)));
    }
    let t_max = truncation();
    let rb = r.powf(b);
    let whole = [-t_max, 0.0, t_max];
    let sym = |t: f64| {
        let d = UDerivatives::at(t);
        d.k[j] + d.k_neg(j)
    };
    let anti = |t: f64| {
        let d = UDerivatives::at(t);
        d.k[j] - d.k_neg(j)
    };
    let p3 = |t: f64| (5.0 * t * t - 1.0) / 3.0;
    let i1 = integrate(sym, 0.0, t_max, opts);
    let i2 = integrate(|t| t * anti(t), 0.0, t_max, opts);
    let i3 = integrate_pieces(|t| UDerivatives::at(t).g[j] * p3(t), &whole, opts);
    let i4 = integrate(|t| t * t * sym(t), 0.0, t_max, opts);
    let i5 = integrate_pieces(
        |t| UDerivatives::at(t).g[j] * (21.0 * t - 193.0 * t.powi(3) + 50.0 * t.powi(5)) / (18.0 * SQRT_2),
        &whole,
        opts,
    );
    let i6 = integrate_pieces(|t| UDerivatives::at(t).g_squared(j) * p3(t).powi(2), &whole, opts);

    let kc = SQRT_2 * b * rb;
    let (ka, kb, kg) = (6.0 * SQRT_2 * b / rb, b / rb, b / (2.0 * SQRT_2 * rb));
    let d0 = if j == 1 { -0.5 - alpha } else { 0.0 };
    Ok(CumulantSeries {
        regime: Regime::Bulk,
        order: j,
        leading: if j == 1 { b * r.powf(2.0 * b) } else { 0.0 },
        c: kc * i1.value,
        d: d0 + 4.0 * b * i2.value + b * i3.value,
        e: ka * i4.value - kb * i5.value - kg * i6.value,
        quad_error: kc * i1.error + 4.0 * b * i2.error + b * i3.error + ka * i4.error + kb * i5.error + kg * i6.error,
    })
}

pub fn edge_cumulant_coeffs(j: usize, b: f64, alpha: f64, s_frak: f64) -> Result<CumulantSeries> {
    edge_cumulant_coeffs_with(j, b, alpha, s_frak, &QuadOptions::default())
}

/// Edge coefficients for the radius `b^{−1/(2b)}(1 + √(2b)𝔰/√n)^{1/(2b)}`.
pub fn edge_cumulant_coeffs_with(j: usize, b: f64, alpha: f64, s_frak: f64, opts: &QuadOptions) -> Result<CumulantSeries> {
    check_order(j)?;
    check_b_alpha(b, alpha)?;
    if !s_frak.is_finite() {
        return invalid("s must be finite");
    }
    let s = s_frak;
    let t_max = truncation();
    let sq2b = (2.0 * b).sqrt();
    let b32 = b.powf(1.5);
    let kp = |t: f64| UDerivatives::at(t).k[j];
    let km = |t: f64| UDerivatives::at(t).k_neg(j);
    let p3 = |t: f64| (5.0 * t * t + 3.0 * s * t - 1.0) / 3.0;
    let p5 = |t: f64| {
        let t2 = t * t;
        (21.0 * t - 193.0 * t * t2 + 50.0 * t * t2 * t2 + 6.0 * s * (1.0 - 29.0 * t2 + 10.0 * t2 * t2)
            - 9.0 * s * s * (3.0 * t - 2.0 * t * t2))
            / 18.0
    };
    let mut half = vec![0.0];
    if -s > 0.0 && -s < t_max {
        half.push(-s);
    }
    half.push(t_max);
    let hi = (-s).min(t_max);
    let g_hi = (-s).min(t_max);
    let g_span: Vec<f64> = if g_hi > -t_max {
        let mut v = vec![-t_max];
        if g_hi > 0.0 {
            v.push(0.0);
        }
        v.push(g_hi);
        v
    } else {
        vec![]
    };

    let a0 = integrate_pieces(km, &half, opts);
    let b0 = integrate(kp, 0.0, hi, opts);
    let a1 = integrate_pieces(|t| (2.0 * t - s) * km(t), &half, opts);
    let b1 = integrate(|t| (2.0 * t + s) * kp(t), 0.0, hi, opts);
    let g1 = integrate_pieces(|t| UDerivatives::at(t).g[j] * p3(t), &g_span, opts);
    let a2 = integrate_pieces(|t| (3.0 * t * t - 2.0 * s * t) * km(t), &half, opts);
    let b2 = integrate(|t| (3.0 * t * t + 2.0 * s * t) * kp(t), 0.0, hi, opts);
    let g2 = integrate_pieces(|t| UDerivatives::at(t).g[j] * p5(t), &g_span, opts);
    let g3 = integrate_pieces(|t| UDerivatives::at(t).g_squared(j) * p3(t).powi(2), &g_span, opts);

    let point = (0.5 + alpha) * (2.0 * s * s - 1.0) / (3.0 * SQRT_2) * b.sqrt()
        + (1.0 + 6.0 * alpha + 6.0 * alpha * alpha) / (12.0 * sq2b);
    let k4 = sq2b.powi(3);
    let c0 = if j == 1 { sq2b * s } else { 0.0 };
    Ok(CumulantSeries {
        regime: Regime::Edge,
        order: j,
        leading: if j == 1 { 1.0 } else { 0.0 },
        c: c0 + sq2b * (a0.value + b0.value),
        d: (0.5 + alpha) * UDerivatives::at(s).k_neg(j) - 2.0 * b * a1.value + 2.0 * b * b1.value + b * g1.value,
        e: k4 * (a2.value + b2.value) - b32 / SQRT_2 * g2.value - b32 / (2.0 * SQRT_2) * g3.value
            + point * UDerivatives::at(-s).g[j],
        quad_error: sq2b * (a0.error + b0.error)
            + 2.0 * b * (a1.error + b1.error)
            + b * g1.error
            + k4 * (a2.error + b2.error)
            + b32 / SQRT_2 * g2.error
            + b32 / (2.0 * SQRT_2) * g3.error,
    })
}

/// Closed forms of the edge coefficients for `j = 1, 2`.
pub fn edge_closed_form(j: usize, b: f64, alpha: f64, s_frak: f64) -> Result<CumulantSeries> {
    check_b_alpha(b, alpha)?;
    let s = s_frak;
    let sb = b.sqrt();
    let es = (-s * s).exp();
    let e2s = (-2.0 * s * s).exp();
    let ec = erfc(s);
    let ec2 = erfc(SQRT_2 * s);
    let sqrt_2pi = (2.0 * PI).sqrt();
    let (leading, c, d, e) = match j {
        1 => (
            1.0,
            sb * s / SQRT_2 * ec - sb / sqrt_2pi * es,
            -0.5 * (0.5 + alpha - 0.5 * b) * ec - b * s / 3.0 * FRAC_1_SQRT_PI * es,
            es / sqrt_2pi
                * ((b * (2.0 + 4.0 * alpha) - 1.0 - 6.0 * alpha - 6.0 * alpha * alpha) / (12.0 * sb)
                    + (3.0 * b - 2.0 - 4.0 * alpha) * s * s / 6.0 * sb
                    - 2.0 * s.powi(4) / 9.0 * b * sb),
        ),
        2 => (
            0.0,
            sb / 2.0 * FRAC_1_SQRT_PI * ec2 + sb * es / sqrt_2pi * (1.0 - ec) + sb * s / SQRT_2 * ec * (0.5 * ec - 1.0),
            -b / (12.0 * PI) * e2s
                + b * s / (2.0 * sqrt_2pi) * ec2
                + b * s / 3.0 * FRAC_1_SQRT_PI * es * (1.0 - ec)
                + (b - 1.0 - 2.0 * alpha) / 4.0 * ec * (0.5 * ec - 1.0),
            es / (12.0 * (2.0 * PI * b).sqrt())
                * (1.0 - 2.0 * b + 6.0 * alpha - 4.0 * b * alpha
                    + 6.0 * alpha * alpha
                    + 2.0 * (2.0 - 3.0 * b + 4.0 * alpha) * b * s * s
                    + 8.0 * b * b / 3.0 * s.powi(4))
                * (1.0 - ec)
                - b * sb * s / (72.0 * SQRT_2 * PI) * e2s
                - b * sb * (1.0 + 4.0 * s * s) / 32.0 * FRAC_1_SQRT_PI * ec2,
        ),
        _ => return invalid(format!("closed forms exist for orders 1 and 2 only, got {j}")),
    };
    Ok(CumulantSeries {
        regime: Regime::Edge,
        order: j,
        leading,
        c,
        d,
        e,
        quad_error: 0.0,
    })
}

/// Outside the support all coefficients vanish except `κ₁ ≈ n`.
pub fn outside_cumulant_coeffs(j: usize) -> Result<CumulantSeries> {
    check_order(j)?;
    Ok(CumulantSeries {
        regime: Regime::Outside,
        order: j,
        leading: if j == 1 { 1.0 } else { 0.0 },
        c: 0.0,
        d: 0.0,
        e: 0.0,
        quad_error: 0.0,
    })
}
