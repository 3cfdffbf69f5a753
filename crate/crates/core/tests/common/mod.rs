//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss–Legendre over `[a, b]` split into `pieces` panels.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        total += r * rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + r * x)).sum::<f64>();
    }
    total
}

/// `log 𝔼[∏ e^{u_ℓ N(D_{r_ℓ})}]` from the radial one-fold integrals
/// `∫ r^{2j−1+2α} e^{−n r^{2b}} ω(r) dr`, with `ω = e^{Σ_{r<r_ℓ} u_ℓ}`.
pub fn radial_log_mgf(b: f64, alpha: f64, n: usize, radii: &[f64], u: &[f64]) -> f64 {
    let rule = gauss_legendre(40);
    let nf = n as f64;
    let weight = |r: f64| -> f64 { radii.iter().zip(u).filter(|(&rl, _)| r < rl).map(|(_, &ul)| ul).sum::<f64>().exp() };
    let mut total = 0.0;
    for j in 1..=n {
        let power = 2.0 * j as f64 - 1.0 + 2.0 * alpha;
        let shape = (j as f64 + alpha) / b;
        let r_peak = (power / (2.0 * b * nf)).powf(0.5 / b);
        let log_peak = power * r_peak.ln() - nf * r_peak.powf(2.0 * b);
        let f = |r: f64| if r <= 0.0 { 0.0 } else { (power * r.ln() - nf * r.powf(2.0 * b) - log_peak).exp() };
        let r_max = ((4.0 * shape).max(shape + 90.0) / nf).powf(0.5 / b);
        let mut cuts = vec![0.0, r_peak, r_max];
        cuts.extend(radii.iter().copied().filter(|&r| r < r_max));
        cuts.sort_by(f64::total_cmp);
        let (mut num, mut den) = (0.0, 0.0);
        for w in cuts.windows(2) {
            let piece = if w[0] == 0.0 {
                // Geometric panels toward the algebraic singularity at 0.
                (0..60)
                    .map(|k| integrate(&f, w[1] * 0.5f64.powi(k + 1), w[1] * 0.5f64.powi(k), 1, &rule))
                    .sum()
            } else {
                integrate(&f, w[0], w[1], 24, &rule)
            };
            den += piece;
            num += weight(0.5 * (w[0] + w[1])) * piece;
        }
        total += (num / den).ln();
    }
    total
}

/// Rows `(a, λ, z, p)` of the frozen high-precision grid for `P(a, z)`.
pub fn gamma_grid() -> Vec<(f64, f64, f64, f64)> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/reg_lower_gamma_grid.csv");
    std::fs::read_to_string(path)
        .expect("grid file")
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2], v[3])
        })
        .collect()
}

/// Joint law of `(N(D_{0.5}), N(D_{0.9}))` for `n = 2`, `b = 1`, `α = 0`,
/// by 30-digit integration of the two-particle density over ℂ².
pub const TWO_PARTICLE_LAW: [((u32, u32), f64); 6] = [
    ((0, 0), 0.1026094051593461332),
    ((0, 1), 0.28931149914850948323),
    ((0, 2), 0.15989825744930786596),
    ((1, 1), 0.22186298121548339155),
    ((1, 2), 0.19082534455177320267),
    ((2, 2), 0.035492512475579923384),
];
