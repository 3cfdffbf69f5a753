//! `𝓕(t, s) = ln(1 + (s − 1)erfc(t)/2)`, `𝓖 = ∂_t 𝓕`, and their exact
//! `u`-derivatives at `s = e^{±u}`, `u = 0`.
//!
//! With `h = erfc(t)/2`, `𝓕(t, e^u)` is the cumulant generating function of a
//! Bernoulli(`h`) variable, so `∂_u^j 𝓕(t, e^u)|₀ = K_j(h)` with `K₁ = h`,
//! `K_j = h(1−h)·Q_j(h)`, `Q₂ = 1`, `Q_{j+1} = (1−2h)Q_j + h(1−h)Q_j′`. The
//! `t`-derivative gives `∂_u^j 𝓖(t, e^u)|₀ = Q_{j+1}(h)·h′(t)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::specfun::erfc;

pub(crate) const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Highest derivative order provided.
pub const MAX_DERIVATIVE: usize = 6;

fn check_s(function: &'static str, t: f64, s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::Domain {
            function,
            value: s,
            expected: "s > 0 and finite t",
        });
    }
    Ok(())
}

/// `𝓕(t, s)` for real `s > 0`.
pub fn f_func(t: f64, s: f64) -> Result<f64> {
    check_s("F_func", t, s)?;
    Ok(f_of_u(t, s.ln()))
}

/// `𝓖(t, s) = (1 − s)/(1 + (s−1)erfc(t)/2) · e^{−t²}/√π`.
pub fn g_func(t: f64, s: f64) -> Result<f64> {
    check_s("G_func", t, s)?;
    Ok(g_of_u(t, s.ln()))
}

/// `𝓕(t, e^u)`.
pub fn f_of_u<S: Scalar>(t: f64, u: S) -> S {
    let h = 0.5 * erfc(t);
    let x = u.exp_m1() * h;
    if x.re() > -0.5 {
        x.ln_1p()
    } else {
        // 1 + (e^u − 1)h = e^u·h + (1 − h) with both terms positive for real u.
        (u.exp() * h + 0.5 * erfc(-t)).ln()
    }
}

/// `𝓖(t, e^u)`.
pub fn g_of_u<S: Scalar>(t: f64, u: S) -> S {
    let h = 0.5 * erfc(t);
    let m1 = u.exp_m1();
    let denom = if (m1 * h).re() > -0.5 {
        m1 * h + 1.0
    } else {
        u.exp() * h + 0.5 * erfc(-t)
    };
    -(m1 / denom) * ((-t * t).exp() * FRAC_1_SQRT_PI)
}

/// Coefficients (in powers of `h`) of `Q₂, …, Q_{MAX_DERIVATIVE+1}`.
fn q_polynomials() -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0]];
    for _ in 0..MAX_DERIVATIVE - 1 {
        let q = out.last().expect("non-empty");
        let mut next = vec![0.0; q.len() + 1];
        for (k, &c) in q.iter().enumerate() {
            // (1 − 2h)·c hᵏ
            next[k] += c;
            next[k + 1] -= 2.0 * c;
            // (h − h²)·k c h^{k−1}
            if k > 0 {
                let kc = k as f64 * c;
                next[k] += kc;
                next[k + 1] -= kc;
            }
        }
        out.push(next);
    }
    out
}

/// `u`-derivatives of `𝓕(t, e^u)` and `𝓖(t, e^u)` at `u = 0` for one `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UDerivatives {
    /// `k[j] = ∂_u^j 𝓕(t, e^u)|₀`, `j = 1..=6` (index 0 unused).
    pub k: [f64; MAX_DERIVATIVE + 1],
    /// `g[j] = ∂_u^j 𝓖(t, e^u)|₀`.
    pub g: [f64; MAX_DERIVATIVE + 1],
}

impl UDerivatives {
    pub fn at(t: f64) -> Self {
        thread_local! {
            static Q: Vec<Vec<f64>> = q_polynomials();
        }
        let h = 0.5 * erfc(t);
        let var = 0.25 * erfc(t) * erfc(-t);
        let dh = -(-t * t).exp() * FRAC_1_SQRT_PI;
        let mut k = [0.0; MAX_DERIVATIVE + 1];
        let mut g = [0.0; MAX_DERIVATIVE + 1];
        Q.with(|q| {
            let eval = |j: usize| q[j - 2].iter().rev().fold(0.0, |acc, c| acc * h + c);
            k[1] = h;
            for j in 2..=MAX_DERIVATIVE {
                k[j] = var * eval(j);
            }
            for j in 1..=MAX_DERIVATIVE {
                g[j] = eval(j + 1) * dh;
            }
        });
        UDerivatives { k, g }
    }

    /// `∂_u^j 𝓕(t, e^{−u})|₀ = (−1)^j K_j`.
    pub fn k_neg(&self, j: usize) -> f64 {
        if j.is_multiple_of(2) {
            self.k[j]
        } else {
            -self.k[j]
        }
    }

    /// `∂_u^j [𝓖(t, e^u)²]|₀ = Σ_{i=1}^{j−1} C(j, i) G_i G_{j−i}` (as `𝓖(t, 1) = 0`).
    pub fn g_squared(&self, j: usize) -> f64 {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for i in 1..j {
            binom = binom * (j - i + 1) as f64 / i as f64;
            acc += binom * self.g[i] * self.g[j - i];
        }
        acc
    }
}
