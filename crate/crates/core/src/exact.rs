//! Exact finite-`n` moment generating function, partition function and
//! joint cumulants.
//!
//! Rotation invariance reduces the `n`-fold integral to a product of radial
//! integrals, so that
//! `ln 𝔼[∏ e^{u_ℓ N(D_{r_ℓ})}] = Σ_j ln(1 + Σ_ℓ ω_ℓ P((j+α)/b, n r_ℓ^{2b}))`.
//! Equivalently, the disk counts are sums over `j` of independent nested
//! indicators: row `j` falls in annulus `ℓ` with probability `q_{jℓ}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::{self, Dd};
use crate::ensemble::{DiskSystem, EnsembleParams};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::scalar::{sum_f64, CompensatedSum, Scalar};
use crate::specfun::{log_gamma, reg_gamma_pair};

/// Highest total order supported by [`joint_cumulants_exact`].
pub const MAX_CUMULANT_ORDER: usize = 6;

/// `P[j][ℓ] = P((j+α)/b, n r_ℓ^{2b})` together with `1 − P[j][ℓ]`, rows
/// `j = 1..=n` stored at index `j − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliProfile {
    n: usize,
    p: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BernoulliProfile {
    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn disks(&self) -> usize {
        self.p
    }

    /// `P[j][ℓ]` with zero-based row and disk indices.
    pub fn prob(&self, row: usize, disk: usize) -> f64 {
        self.lower[row * self.p + disk]
    }

    /// `1 − P[j][ℓ]`, computed without cancellation.
    pub fn complement(&self, row: usize, disk: usize) -> f64 {
        self.upper[row * self.p + disk]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.lower[row * self.p..(row + 1) * self.p]
    }

    /// Annulus probabilities `q[j][0..=p]`: `q[ℓ]` is the chance that the
    /// row-`j` modulus lies in `[r_{ℓ−1}, r_ℓ)` (`r₀ = 0`, `r_{p+1} = ∞`).
    pub fn annuli(&self, row: usize) -> Vec<f64> {
        let mut q = Vec::with_capacity(self.p + 1);
        let (mut lo_p, mut lo_q) = (0.0, 1.0);
        for l in 0..self.p {
            let (hp, hq) = (self.prob(row, l), self.complement(row, l));
            // Difference of whichever representation is smaller.
            q.push(if lo_p < 0.5 { hp - lo_p } else { lo_q - hq }.max(0.0));
            lo_p = hp;
            lo_q = hq;
        }
        q.push(lo_q);
        q
    }
}

/// Radial profile for explicit radii (already resolved at `params.n`).
pub fn bernoulli_profile_for_radii(params: &EnsembleParams, radii: &[f64], exec: Execution) -> Result<BernoulliProfile> {
    params.validate()?;
    let p = radii.len();
    if p == 0 {
        return invalid("at least one radius is required");
    }
    let n = params.n;
    let z: Vec<f64> = radii.iter().map(|r| n as f64 * r.powf(2.0 * params.b)).collect();
    let rows = exec.try_map(n, |row| -> Result<Vec<(f64, f64)>> {
        let a = params.shape(row + 1);
        z.iter().map(|&z| reg_gamma_pair(a, z)).collect()
    })?;
    let mut lower = Vec::with_capacity(n * p);
    let mut upper = Vec::with_capacity(n * p);
    for row in rows {
        for (lp, uq) in row {
            lower.push(lp);
            upper.push(uq);
        }
    }
    Ok(BernoulliProfile { n, p, lower, upper })
}

pub fn bernoulli_profile(params: &EnsembleParams, disks: &DiskSystem) -> Result<BernoulliProfile> {
    bernoulli_profile_with(params, disks, Execution::default())
}

pub fn bernoulli_profile_with(params: &EnsembleParams, disks: &DiskSystem, exec: Execution) -> Result<BernoulliProfile> {
    let radii = disks.resolve(params)?;
    bernoulli_profile_for_radii(params, &radii, exec)
}

fn row_log_factor<S: Scalar>(q: &[f64], tail: &[S], big_m1: &[S]) -> Result<S> {
    let p = tail.len() - 1;
    let mut excess = S::zero();
    for l in 0..p {
        excess += big_m1[l] * q[l];
    }
    if excess.re() > -0.5 {
        return Ok(excess.ln_1p());
    }
    // Far from 1: sum the positive mixture directly.
    let mut mix = S::from_f64(q[p]);
    for l in 0..p {
        mix += tail[l].exp() * q[l];
    }
    if !(mix.re() > 0.0) && mix.im() == 0.0 {
        return Err(Error::Numerical(format!("non-positive MGF factor {:?}", mix)));
    }
    Ok(mix.ln())
}

/// `Σ_j ln(Σ_ℓ Ω_ℓ q_{jℓ})` for weights `u` (one per disk of the profile).
pub fn log_mgf_from_profile<S: Scalar>(profile: &BernoulliProfile, u: &[S], exec: Execution) -> Result<S> {
    let p = profile.disks();
    if u.len() != p {
        return invalid(format!("expected {p} weights, got {}", u.len()));
    }
    let mut tail = vec![S::zero(); p + 1];
    for l in (0..p).rev() {
        tail[l] = tail[l + 1] + u[l];
    }
    let big_m1: Vec<S> = tail[..p].iter().map(|t| t.exp_m1()).collect();
    let terms = exec.try_map(profile.rows(), |row| row_log_factor(&profile.annuli(row), &tail, &big_m1))?;
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    Ok(acc.value())
}

/// `ln 𝔼[∏_ℓ e^{u_ℓ N(D_{r_ℓ})}]` at finite `n`.
pub fn log_mgf_exact(params: &EnsembleParams, disks: &DiskSystem) -> Result<f64> {
    let profile = bernoulli_profile(params, disks)?;
    log_mgf_from_profile(&profile, &disks.u(), Execution::default())
}

/// The same quantity at complex weights (radii from `disks`, its `u` ignored);
/// used for derivative checks by complex-step and contour differentiation.
pub fn log_mgf_complex(params: &EnsembleParams, disks: &DiskSystem, u: &[Complex64]) -> Result<Complex64> {
    let profile = bernoulli_profile(params, disks)?;
    log_mgf_from_profile(&profile, u, Execution::default())
}

/// `ln Z_n = −(n²/2b)ln n − ((1+2α)/2b) n ln n + n ln(π/b) + Σ_j ln Γ((j+α)/b)`.
pub fn log_partition_exact(params: &EnsembleParams) -> Result<f64> {
    params.validate()?;
    let (b, a) = (params.b, params.alpha);
    let nf = params.n as f64;
    let ln_n = nf.ln();
    let mut terms = Vec::with_capacity(params.n + 3);
    terms.push(-(nf * nf / (2.0 * b)) * ln_n);
    terms.push(-((1.0 + 2.0 * a) / (2.0 * b)) * nf * ln_n);
    terms.push(nf * (std::f64::consts::PI / b).ln());
    for j in 1..=params.n {
        terms.push(log_gamma(params.shape(j))?);
    }
    Ok(sum_f64(terms))
}

/// [`log_partition_exact`] in double-double arithmetic.
pub(crate) fn log_partition_dd(params: &EnsembleParams) -> Dd {
    let b = Dd::from_f64(params.b);
    let alpha = Dd::from_f64(params.alpha);
    let nf = Dd::from_f64(params.n as f64);
    let ln_n = nf.ln();
    let two_b = b.mul_f64(2.0);
    let mut acc = -(nf * nf / two_b) * ln_n;
    acc = acc - ((Dd::from_f64(1.0) + alpha.mul_f64(2.0)) / two_b) * nf * ln_n;
    acc = acc + nf * (dd::PI / b).ln();
    for j in 1..=params.n {
        acc = acc + dd::log_gamma((Dd::from_f64(j as f64) + alpha) / b);
    }
    acc
}

fn check_multi_index(k: &[usize], p: usize) -> Result<usize> {
    if k.len() != p {
        return invalid(format!("multi-index {:?} must have one entry per disk ({p})", k));
    }
    let total: usize = k.iter().sum();
    if total == 0 {
        return invalid("cumulant multi-index must have positive total order");
    }
    if total > MAX_CUMULANT_ORDER {
        return Err(Error::OrderTooHigh {
            order: total,
            max: MAX_CUMULANT_ORDER,
        });
    }
    Ok(total)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Joint cumulant `κ_k` of the nested indicators of one row, from the exact
/// moments `𝔼[∏ X_ℓ^{k_ℓ}] = P[min{ℓ : k_ℓ > 0}]` via
/// `κ(l + e_q) = m(l + e_q) − Σ_{h ≤ l, h ≠ l} C(l, h) κ(h + e_q) m(l − h)`.
fn row_joint_cumulant(probs: &[f64], k: &[usize]) -> f64 {
    let p = k.len();
    let mut radix = vec![1usize; p + 1];
    for l in (0..p).rev() {
        radix[l] = radix[l + 1] * (k[l] + 1);
    }
    let size = radix[0];
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; p];
        for l in 0..p {
            d[l] = idx / radix[l + 1];
            idx %= radix[l + 1];
        }
        d
    };
    let encode = |d: &[usize]| -> usize { d.iter().enumerate().map(|(l, &x)| x * radix[l + 1]).sum() };
    let moment = |d: &[usize]| -> f64 {
        match d.iter().position(|&x| x > 0) {
            Some(l) => probs[l],
            None => 1.0,
        }
    };
    let mut kappa = vec![0.0; size];
    for idx in 1..size {
        let target = digits(idx);
        let q = target.iter().position(|&x| x > 0).expect("idx > 0");
        let mut base = target.clone();
        base[q] -= 1;
        let mut value = moment(&target);
        // Enumerate h ≤ base with h ≠ base.
        let mut h = vec![0usize; p];
        loop {
            if h != base {
                let coef: f64 = (0..p).map(|l| binom(base[l], h[l])).product();
                let mut hq = h.clone();
                hq[q] += 1;
                let rest: Vec<usize> = (0..p).map(|l| base[l] - h[l]).collect();
                value -= coef * kappa[encode(&hq)] * moment(&rest);
            }
            let mut l = p;
            loop {
                if l == 0 {
                    break;
                }
                l -= 1;
                if h[l] < base[l] {
                    h[l] += 1;
                    for x in h.iter_mut().skip(l + 1) {
                        *x = 0;
                    }
                    break;
                }
                if l == 0 {
                    l = usize::MAX;
                    break;
                }
            }
            if l == usize::MAX {
                break;
            }
        }
        kappa[idx] = value;
    }
    kappa[size - 1]
}

/// Exact joint cumulants at `u = 0` for each multi-index (one entry per disk).
///
/// Orders one and two use `Σ_j P_ℓ` and `Σ_j P_{min}(1 − P_{max})`; higher
/// orders use the exact categorical moments of each row.
pub fn joint_cumulants_exact(params: &EnsembleParams, disks: &DiskSystem, orders: &[Vec<usize>]) -> Result<Vec<f64>> {
    let profile = bernoulli_profile(params, disks)?;
    joint_cumulants_from_profile(&profile, orders)
}

pub fn joint_cumulants_from_profile(profile: &BernoulliProfile, orders: &[Vec<usize>]) -> Result<Vec<f64>> {
    let p = profile.disks();
    let mut out = Vec::with_capacity(orders.len());
    for k in orders {
        let total = check_multi_index(k, p)?;
        let support: Vec<usize> = (0..p).filter(|&l| k[l] > 0).collect();
        let value = match total {
            1 => sum_f64((0..profile.rows()).map(|j| profile.prob(j, support[0]))),
            2 => {
                let (lo, hi) = (support[0], *support.last().expect("non-empty"));
                sum_f64((0..profile.rows()).map(|j| profile.prob(j, lo) * profile.complement(j, hi)))
            }
            _ => {
                let terms = Execution::default().map(profile.rows(), |j| row_joint_cumulant(profile.row(j), k));
                sum_f64(terms)
            }
        };
        out.push(value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCov {
    pub means: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

/// Means and covariance matrix of `(N(D_{r₁}), …, N(D_{r_p}))`.
pub fn mean_var_exact(params: &EnsembleParams, disks: &DiskSystem) -> Result<MeanCov> {
    let profile = bernoulli_profile(params, disks)?;
    Ok(mean_cov_from_profile(&profile))
}

pub fn mean_cov_from_profile(profile: &BernoulliProfile) -> MeanCov {
    let p = profile.disks();
    let rows = profile.rows();
    let means = (0..p).map(|l| sum_f64((0..rows).map(|j| profile.prob(j, l)))).collect();
    let mut covariance = vec![vec![0.0; p]; p];
    for a in 0..p {
        for c in a..p {
            let v = sum_f64((0..rows).map(|j| profile.prob(j, a) * profile.complement(j, c)));
            covariance[a][c] = v;
            covariance[c][a] = v;
        }
    }
    MeanCov { means, covariance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Disk;

    fn single(r: f64, u: f64) -> DiskSystem {
        DiskSystem::new(vec![Disk::fixed(r, u)]).unwrap()
    }

    #[test]
    fn zero_weights_give_zero() {
        let p = EnsembleParams::new(1.5, 0.3, 120).unwrap();
        let ds = DiskSystem::new(vec![Disk::fixed(0.4, 0.0), Disk::fixed(0.9, 0.0)]).unwrap();
        assert_eq!(log_mgf_exact(&p, &ds).unwrap(), 0.0);
    }

    #[test]
    fn single_point_closed_form() {
        let p = EnsembleParams::new(1.0, 0.0, 1).unwrap();
        for &(r, u) in &[(0.7, 1.3), (1.5, -2.0), (0.1, 0.4)] {
            let want = (u.exp_m1() * (-(r * r)).exp_m1().abs()).ln_1p();
            let got = log_mgf_exact(&p, &single(r, u)).unwrap();
            assert!((got - want).abs() < 4e-16, "{got} {want}");
        }
        let prof = bernoulli_profile(&p, &single(1.0, 0.0)).unwrap();
        assert!((prof.prob(0, 0) - (1.0 - (-1f64).exp())).abs() < 4e-16);
    }

    #[test]
    fn two_particle_oracle() {
        // Full planar two-particle integral (angular part in closed form,
        // radial part by 30-digit quadrature).
        let cases = [
            (1.0, 0.0, vec![0.5], vec![1.0], 0.660_561_230_832_218_176_89),
            (2.0, 0.5, vec![0.4, 0.9], vec![0.4, -0.7], -0.864_558_358_374_293_567_08),
            (0.5, 0.0, vec![1.3], vec![-1.2], -0.921_282_789_180_950_428_75),
        ];
        for (b, alpha, r, u, want) in cases {
            let p = EnsembleParams::new(b, alpha, 2).unwrap();
            let disks = r.iter().zip(&u).map(|(&r, &u)| Disk::fixed(r, u)).collect();
            let got = log_mgf_exact(&p, &DiskSystem::new(disks).unwrap()).unwrap();
            assert!((got - want).abs() < 1e-13, "b={b}: {got} vs {want}");
        }
    }

    #[test]
    fn profile_invariants() {
        let p = EnsembleParams::new(1.0, 0.0, 100).unwrap();
        let ds = DiskSystem::new(vec![Disk::fixed(0.3, 0.0), Disk::fixed(0.5, 0.0), Disk::fixed(1.1, 0.0)]).unwrap();
        let prof = bernoulli_profile(&p, &ds).unwrap();
        for j in 0..100 {
            let row = prof.row(j);
            assert!(row[0] <= row[1] && row[1] <= row[2]);
            let q = prof.annuli(j);
            assert!(q.iter().all(|&x| x >= 0.0));
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // Transition of the r = 0.5 column around j ≈ n r² = 25.
        assert!(prof.prob(4, 1) > 1.0 - 1e-6);
        assert!(prof.prob(60, 1) < 1e-6);
        assert!((prof.prob(24, 1) - 0.5).abs() < 0.1);
    }

    #[test]
    fn zero_radius_column_is_zero() {
        let p = EnsembleParams::new(0.7, 0.2, 30).unwrap();
        let prof = bernoulli_profile(&p, &single(1e-300, 0.0)).unwrap();
        assert!((0..30).all(|j| prof.prob(j, 0) == 0.0));
    }

    #[test]
    fn partition_function_values() {
        let p = EnsembleParams::new(1.0, 0.0, 1).unwrap();
        assert!((log_partition_exact(&p).unwrap() - std::f64::consts::PI.ln()).abs() < 1e-15);
        let p = EnsembleParams::new(2.5, 0.7, 1).unwrap();
        let want = (std::f64::consts::PI / 2.5).ln() + log_gamma(1.7 / 2.5).unwrap();
        assert!((log_partition_exact(&p).unwrap() - want).abs() < 1e-15);
        // 30-digit oracle.
        let p = EnsembleParams::new(2.0, 0.5, 50).unwrap();
        let want = -1_400.556_636_252_794_1;
        assert!((log_partition_exact(&p).unwrap() - want).abs() < 1e-11);
        assert!((log_partition_dd(&p).to_f64() - want).abs() < 1e-12);
    }

    #[test]
    fn low_order_cumulants() {
        let p = EnsembleParams::new(1.0, 0.0, 80).unwrap();
        let ds = DiskSystem::new(vec![Disk::fixed(0.4, 0.0), Disk::fixed(0.8, 0.0)]).unwrap();
        let prof = bernoulli_profile(&p, &ds).unwrap();
        let k = joint_cumulants_from_profile(&prof, &[vec![1, 0], vec![0, 2], vec![1, 1]]).unwrap();
        let mean: f64 = (0..80).map(|j| prof.prob(j, 0)).sum();
        let var: f64 = (0..80).map(|j| prof.prob(j, 1) * (1.0 - prof.prob(j, 1))).sum();
        let cov: f64 = (0..80).map(|j| prof.prob(j, 0) * (1.0 - prof.prob(j, 1))).sum();
        assert!((k[0] - mean).abs() < 1e-12);
        assert!((k[1] - var).abs() < 1e-12);
        assert!((k[2] - cov).abs() < 1e-12);
        let mc = mean_cov_from_profile(&prof);
        assert_eq!(mc.covariance[0][1], mc.covariance[1][0]);
        assert!((mc.covariance[0][1] - k[2]).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_bernoulli_cumulants() {
        // Single indicator with mean p: κ₃ = p(1−p)(1−2p), κ₄ = p(1−p)(1−6p(1−p)).
        let pr = 0.3;
        let v = pr * (1.0 - pr);
        assert!((row_joint_cumulant(&[pr], &[3]) - v * (1.0 - 2.0 * pr)).abs() < 1e-16);
        assert!((row_joint_cumulant(&[pr], &[4]) - v * (1.0 - 6.0 * v)).abs() < 1e-16);
        // Two nested indicators X₁ ≤ X₂: closed-form orders agree with the recursion.
        let probs = [0.2, 0.7];
        assert!((row_joint_cumulant(&probs, &[1, 1]) - 0.2 * 0.3).abs() < 1e-16);
        assert!((row_joint_cumulant(&probs, &[0, 2]) - 0.7 * 0.3).abs() < 1e-16);
    }

    #[test]
    fn cumulant_order_limits() {
        let p = EnsembleParams::new(1.0, 0.0, 10).unwrap();
        let ds = single(0.5, 0.0);
        assert!(matches!(
            joint_cumulants_exact(&p, &ds, &[vec![7]]),
            Err(Error::OrderTooHigh { order: 7, max: 6 })
        ));
        assert!(joint_cumulants_exact(&p, &ds, &[vec![0]]).is_err());
        assert!(joint_cumulants_exact(&p, &ds, &[vec![1, 1]]).is_err());
    }

    fn contour_derivative(f: impl Fn(Complex64) -> Complex64, order: usize) -> f64 {
        // Cauchy integral on |u| = ρ by the trapezoidal rule.
        let m = 64;
        let rho: f64 = 0.5;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
            acc += f(w * rho) / w.powu(order as u32);
        }
        let fact: f64 = (1..=order).map(|i| i as f64).product();
        (acc / m as f64).re * fact / rho.powi(order as i32)
    }

    #[test]
    fn cumulants_match_differentiation_of_log_mgf() {
        let p = EnsembleParams::new(1.3, 0.4, 60).unwrap();
        let ds = DiskSystem::new(vec![Disk::fixed(0.5, 0.0), Disk::fixed(0.85, 0.0)]).unwrap();
        let prof = bernoulli_profile(&p, &ds).unwrap();
        let f = |u: [Complex64; 2]| log_mgf_from_profile(&prof, &u, Execution::Sequential).unwrap();
        let z = Complex64::new(0.0, 0.0);
        // Complex step for first derivatives.
        let h = 1e-20;
        let d1 = f([Complex64::new(0.0, h), z]).im / h;
        let d2 = f([z, Complex64::new(0.0, h)]).im / h;
        let k = joint_cumulants_from_profile(&prof, &[vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![3, 0], vec![2, 2], vec![0, 6]]).unwrap();
        assert!((d1 - k[0]).abs() < 1e-10);
        assert!((d2 - k[1]).abs() < 1e-10);
        let c20 = contour_derivative(|w| f([w, z]), 2);
        let c30 = contour_derivative(|w| f([w, z]), 3);
        let c06 = contour_derivative(|w| f([z, w]), 6);
        assert!((c20 - k[2]).abs() < 1e-10, "{c20} {}", k[2]);
        assert!((c30 - k[4]).abs() < 1e-10, "{c30} {}", k[4]);
        assert!((c06 - k[6]).abs() < 1e-8, "{c06} {}", k[6]);
        // Mixed: ∂₁∂₂ via the diagonal identity f(w,w) − f(w,0) − f(0,w).
        let diag = contour_derivative(|w| f([w, w]) - f([w, z]) - f([z, w]), 2) / 2.0;
        assert!((diag - k[3]).abs() < 1e-10);
        // ∂₁²∂₂²: fourth derivative of f(w, w) has 6·κ₂₂ among its terms.
        let all4 = contour_derivative(|w| f([w, w]), 4);
        let k4 = joint_cumulants_from_profile(&prof, &[vec![4, 0], vec![3, 1], vec![1, 3], vec![0, 4]]).unwrap();
        let mixed = (all4 - k4[0] - 4.0 * k4[1] - 4.0 * k4[2] - k4[3]) / 6.0;
        assert!((mixed - k[5]).abs() < 1e-9, "{mixed} {}", k[5]);
    }

    #[test]
    fn strategies_agree_bitwise() {
        let p = EnsembleParams::new(1.0, 0.0, 300).unwrap();
        let ds = single(0.6, 0.8);
        let seq = bernoulli_profile_with(&p, &ds, Execution::Sequential).unwrap();
        let par = bernoulli_profile_with(&p, &ds, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        let a = log_mgf_from_profile(&seq, &[0.8], Execution::Sequential).unwrap();
        let b = log_mgf_from_profile(&par, &[0.8], Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
