//! Coefficients `C₁ … C₄` of `ln 𝔼[∏ e^{u_ℓ N(D_{r_ℓ})}] ≈ C₁n + C₂√n + C₃ + C₄/√n`.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use super::functions::{f_of_u, g_of_u};
use crate::ensemble::{DiskSystem, EnsembleParams, Placement, Regime};
use crate::error::Result;
use crate::exec::Execution;
use crate::quad::{integrate, integrate_pieces, truncation, QuadOptions};
use crate::scalar::Scalar;

/// `|𝔰|` beyond which the edge Gaussian factors underflow and predictions
/// are flagged as degenerate.
pub const EDGE_S_FLAG: f64 = 6.0;

/// The four coefficients at generic (real or complex) weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<S> {
    pub c1: S,
    pub c2: S,
    pub c3: S,
    pub c4: S,
    /// Sum of quadrature error estimates, weighted by their prefactors.
    pub quad_error: f64,
}

impl<S: Scalar> Coefficients<S> {
    fn zero() -> Self {
        Coefficients {
            c1: S::zero(),
            c2: S::zero(),
            c3: S::zero(),
            c4: S::zero(),
            quad_error: 0.0,
        }
    }

    fn accumulate(&mut self, other: &Self) {
        self.c1 += other.c1;
        self.c2 += other.c2;
        self.c3 += other.c3;
        self.c4 += other.c4;
        self.quad_error += other.quad_error;
    }

    /// `C₁n + C₂√n + C₃ + C₄/√n`.
    pub fn evaluate(&self, n: f64) -> S {
        let sq = n.sqrt();
        self.c1 * n + self.c2 * sq + self.c3 + self.c4 * (1.0 / sq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskContribution {
    pub index: usize,
    pub regime: Regime,
    /// Fixed radius (bulk and outside disks).
    pub r: Option<f64>,
    /// Edge parameter 𝔰 (edge disk).
    pub s_frak: Option<f64>,
    pub u: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    pub quad_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionCoefficients {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    pub quad_error: f64,
    /// Set when the edge disk has `|𝔰| > 6`.
    pub degenerate_edge: bool,
    pub per_disk_breakdown: Vec<DiskContribution>,
}

impl ExpansionCoefficients {
    pub fn evaluate(&self, n: f64) -> f64 {
        Coefficients {
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            c4: self.c4,
            quad_error: self.quad_error,
        }
        .evaluate(n)
    }
}

fn bulk<S: Scalar>(b: f64, alpha: f64, r: f64, u: S, opts: &QuadOptions) -> Coefficients<S> {
    let t_max = truncation();
    let rb = r.powf(b);
    let sym = |t: f64| f_of_u(t, u) + f_of_u(t, -u);
    let anti = |t: f64| f_of_u(t, u) - f_of_u(t, -u);
    let p3 = |t: f64| (5.0 * t * t - 1.0) / 3.0;
    let p5 = |t: f64| (21.0 * t - 193.0 * t.powi(3) + 50.0 * t.powi(5)) / 18.0;
    let whole = [-t_max, 0.0, t_max];

    let i1 = integrate(sym, 0.0, t_max, opts);
    let i2 = integrate(|t| anti(t) * t, 0.0, t_max, opts);
    let i3 = integrate_pieces(|t| g_of_u(t, u) * p3(t), &whole, opts);
    let i4 = integrate(|t| sym(t) * (t * t), 0.0, t_max, opts);
    let i5 = integrate_pieces(|t| g_of_u(t, u) * p5(t), &whole, opts);
    let i6 = integrate_pieces(
        |t| {
            let g = g_of_u(t, u) * p3(t);
            g * g
        },
        &whole,
        opts,
    );

    let k2 = SQRT_2 * b * rb;
    let k4a = 6.0 * SQRT_2 * b / rb;
    let k4b = b / (SQRT_2 * rb);
    let k4c = b / (2.0 * SQRT_2 * rb);
    Coefficients {
        c1: u * (b * r.powf(2.0 * b)),
        c2: i1.value * k2,
        c3: u * -(0.5 + alpha) + i2.value * (4.0 * b) + i3.value * b,
        c4: i4.value * k4a - i5.value * k4b - i6.value * k4c,
        quad_error: k2 * i1.error
            + 4.0 * b * i2.error
            + b * i3.error
            + k4a * i4.error
            + k4b * i5.error
            + k4c * i6.error,
    }
}

/// Breakpoints of `[lo, hi]` at the interior points of `extra`, sorted.
fn span(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts
}

fn edge<S: Scalar>(b: f64, alpha: f64, s: f64, u: S, opts: &QuadOptions) -> Coefficients<S> {
    let t_max = truncation();
    let sq2b = (2.0 * b).sqrt();
    let b32 = b.powf(1.5);
    let f_minus = |t: f64| f_of_u(t, -u);
    let f_plus = |t: f64| f_of_u(t, u);
    let p3 = |t: f64| (5.0 * t * t + 3.0 * s * t - 1.0) / 3.0;
    let p5 = |t: f64| {
        let t2 = t * t;
        (21.0 * t - 193.0 * t * t2 + 50.0 * t * t2 * t2 + 6.0 * s * (1.0 - 29.0 * t2 + 10.0 * t2 * t2)
            - 9.0 * s * s * (3.0 * t - 2.0 * t * t2))
            / 18.0
    };
    let half = span(0.0, t_max, &[-s]);
    // ∫_0^{−𝔰}: the integrand tends to u (not zero) as t → −∞, so no truncation
    // on the left; on the right it is negligible past T.
    let to_minus_s = |g: &dyn Fn(f64) -> S| {
        let hi = (-s).min(t_max);
        integrate(g, 0.0, hi, opts)
    };
    // ∫_{−∞}^{−𝔰} of 𝓖-weighted integrands, truncated at ±T.
    let g_hi = (-s).min(t_max);
    let g_span = if g_hi > -t_max { span(-t_max, g_hi, &[0.0]) } else { vec![] };
    let left = |g: &dyn Fn(f64) -> S| integrate_pieces(g, &g_span, opts);

    let a0 = integrate_pieces(f_minus, &half, opts);
    let b0 = to_minus_s(&f_plus);
    let a1 = integrate_pieces(|t| f_minus(t) * (2.0 * t - s), &half, opts);
    let b1 = to_minus_s(&|t| f_plus(t) * (2.0 * t + s));
    let g1 = left(&|t| g_of_u(t, u) * p3(t));
    let a2 = integrate_pieces(|t| f_minus(t) * (3.0 * t * t - 2.0 * s * t), &half, opts);
    let b2 = to_minus_s(&|t| f_plus(t) * (3.0 * t * t + 2.0 * s * t));
    let g2 = left(&|t| g_of_u(t, u) * p5(t));
    let g3 = left(&|t| {
        let g = g_of_u(t, u) * p3(t);
        g * g
    });

    let point = (0.5 + alpha) * (2.0 * s * s - 1.0) / (3.0 * SQRT_2) * b.sqrt()
        + (1.0 + 6.0 * alpha + 6.0 * alpha * alpha) / (12.0 * sq2b);
    let k4 = sq2b.powi(3);
    Coefficients {
        c1: u,
        c2: (a0.value + u * s + b0.value) * sq2b,
        c3: f_of_u(s, -u) * (0.5 + alpha) - a1.value * (2.0 * b) + b1.value * (2.0 * b) + g1.value * b,
        c4: (a2.value + b2.value) * k4 - g2.value * (b32 / SQRT_2) - g3.value * (b32 / (2.0 * SQRT_2))
            + g_of_u(-s, u) * point,
        quad_error: sq2b * (a0.error + b0.error)
            + 2.0 * b * (a1.error + b1.error)
            + b * g1.error
            + k4 * (a2.error + b2.error)
            + b32 / SQRT_2 * g2.error
            + b32 / (2.0 * SQRT_2) * g3.error,
    }
}

/// Contribution of one disk.
pub fn disk_coefficients<S: Scalar>(b: f64, alpha: f64, placement: Placement, u: S, opts: &QuadOptions) -> Coefficients<S> {
    match placement {
        Placement::Bulk { r } => bulk(b, alpha, r, u, opts),
        Placement::Edge { s_frak } => edge(b, alpha, s_frak, u, opts),
        Placement::Outside { .. } => Coefficients { c1: u, ..Coefficients::zero() },
    }
}

/// `C₁ … C₄` at generic weights `u` (one per placement).
pub fn coefficients_at<S: Scalar>(
    b: f64,
    alpha: f64,
    placements: &[Placement],
    u: &[S],
    opts: &QuadOptions,
    exec: Execution,
) -> Vec<Coefficients<S>> {
    exec.map(placements.len(), |i| disk_coefficients(b, alpha, placements[i], u[i], opts))
}

/// `C₁ … C₄` with the default quadrature tolerance.
pub fn theorem_coefficients(params: &EnsembleParams, disks: &DiskSystem) -> Result<ExpansionCoefficients> {
    theorem_coefficients_with(params, disks, &QuadOptions::default())
}

pub fn theorem_coefficients_with(params: &EnsembleParams, disks: &DiskSystem, opts: &QuadOptions) -> Result<ExpansionCoefficients> {
    params.validate()?;
    let placements = disks.placements(params.b)?;
    let u = disks.u();
    let parts = coefficients_at(params.b, params.alpha, &placements, &u, opts, Execution::default());
    let mut total = Coefficients::zero();
    let mut per_disk = Vec::with_capacity(parts.len());
    let mut degenerate_edge = false;
    for (i, (c, pl)) in parts.iter().zip(&placements).enumerate() {
        total.accumulate(c);
        let (r, s_frak) = match *pl {
            Placement::Bulk { r } | Placement::Outside { r } => (Some(r), None),
            Placement::Edge { s_frak } => {
                degenerate_edge |= s_frak.abs() > EDGE_S_FLAG;
                (None, Some(s_frak))
            }
        };
        per_disk.push(DiskContribution {
            index: i,
            regime: pl.regime(),
            r,
            s_frak,
            u: u[i],
            c1: c.c1,
            c2: c.c2,
            c3: c.c3,
            c4: c.c4,
            quad_error: c.quad_error,
        });
    }
    Ok(ExpansionCoefficients {
        c1: total.c1,
        c2: total.c2,
        c3: total.c3,
        c4: total.c4,
        quad_error: total.quad_error,
        degenerate_edge,
        per_disk_breakdown: per_disk,
    })
}

/// `C₁n + C₂√n + C₃ + C₄/√n` at `params.n`.
pub fn predict_log_mgf(params: &EnsembleParams, disks: &DiskSystem) -> Result<f64> {
    Ok(theorem_coefficients(params, disks)?.evaluate(params.n as f64))
}
