//! Experiments confronting exact, asymptotic and Monte Carlo results.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::asymptotics::{edge_closed_form, theorem_coefficients_with, zn_expansion_with_cap, zn_residual};
use crate::ensemble::{Disk, DiskSystem, EnsembleParams};
use crate::error::{invalid, Error, Result};
use crate::exact::log_mgf_exact;
use crate::exec::Execution;
use crate::quad::QuadOptions;
use crate::sampler::sample_counts;

/// Residuals are fitted only where they exceed this multiple of the
/// estimated numerical noise.
pub const NOISE_FACTOR: f64 = 100.0;

/// Largest condition number accepted by [`coefficient_fit`]; with data
/// accurate to ~1e-13 relative this keeps the fitted coefficients meaningful.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualScan {
    pub n_values: Vec<usize>,
    pub exact: Vec<f64>,
    pub predicted: Vec<f64>,
    /// `exact − predicted`.
    pub residuals: Vec<f64>,
    pub noise_floor: Vec<f64>,
    /// Whether each point entered the rate fit.
    pub fitted: Vec<bool>,
    /// Least-squares slope of `ln|r|` against `ln n`.
    pub fitted_rate: f64,
    /// Least-squares `K` in `|r| ≈ K (ln n)²/n`.
    pub fitted_k: f64,
    pub quad_error: f64,
}

/// Least-squares slope of `ln|y|` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn check_n_values(n_values: &[usize], min_len: usize) -> Result<()> {
    if n_values.len() < min_len {
        return invalid(format!("need at least {min_len} n-values, got {}", n_values.len()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("n-values must be strictly increasing");
    }
    if n_values[0] < 50 {
        return invalid(format!("n-values must be at least 50, got {}", n_values[0]));
    }
    Ok(())
}

/// Exact log-MGF at each `n` (edge radii re-resolved per `n`).
pub fn exact_log_mgfs(params: &EnsembleParams, disks: &DiskSystem, n_values: &[usize], exec: Execution) -> Result<Vec<f64>> {
    exec.try_map(n_values.len(), |i| log_mgf_exact(&params.with_n(n_values[i]), disks))
}

pub fn residual_scan(params: &EnsembleParams, disks: &DiskSystem, n_values: &[usize]) -> Result<ResidualScan> {
    residual_scan_with(params, disks, n_values, &QuadOptions::default())
}

/// Residuals `log_mgf_exact − predict_log_mgf` over `n_values` (at least 4,
/// each ≥ 50, spanning a factor ≥ 8) and their fitted decay rate.
pub fn residual_scan_with(
    params: &EnsembleParams,
    disks: &DiskSystem,
    n_values: &[usize],
    opts: &QuadOptions,
) -> Result<ResidualScan> {
    check_n_values(n_values, 4)?;
    if n_values[n_values.len() - 1] < 8 * n_values[0] {
        return invalid("n-values must span at least a factor of 8");
    }
    let coeffs = theorem_coefficients_with(params, disks, opts)?;
    let exact = exact_log_mgfs(params, disks, n_values, Execution::default())?;
    let mut predicted = Vec::with_capacity(n_values.len());
    let mut residuals = Vec::with_capacity(n_values.len());
    let mut noise_floor = Vec::with_capacity(n_values.len());
    for (&n, &e) in n_values.iter().zip(&exact) {
        let nf = n as f64;
        let p = coeffs.evaluate(nf);
        predicted.push(p);
        residuals.push(e - p);
        noise_floor.push(NOISE_FACTOR * (coeffs.quad_error * nf.sqrt() + f64::EPSILON * (nf + e.abs() + p.abs())));
    }
    let fitted: Vec<bool> = residuals.iter().zip(&noise_floor).map(|(r, f)| r.abs() > *f).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = n_values
        .iter()
        .zip(&residuals)
        .zip(&fitted)
        .filter(|(_, &f)| f)
        .map(|((&n, &r), _)| (n as f64, r))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::BelowNoise);
    }
    let fitted_rate = log_log_slope(&xs, &ys);
    let w: Vec<f64> = xs.iter().map(|n| n.ln().powi(2) / n).collect();
    let fitted_k = ys.iter().zip(&w).map(|(r, w)| r.abs() * w).sum::<f64>() / w.iter().map(|w| w * w).sum::<f64>();
    Ok(ResidualScan {
        n_values: n_values.to_vec(),
        exact,
        predicted,
        residuals,
        noise_floor,
        fitted,
        fitted_rate,
        fitted_k,
        quad_error: coeffs.quad_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFit {
    pub n_values: Vec<usize>,
    /// Least-squares `(Ĉ₁, Ĉ₂, Ĉ₃, Ĉ₄)`.
    pub fitted: [f64; 4],
    pub theorem: [f64; 4],
    /// `fitted − theorem`.
    pub deviation: [f64; 4],
    /// Condition number of the column-scaled basis.
    pub condition: f64,
}

/// Fits the exact log-MGF against `{n, √n, 1, n^{−1/2}}` over at least six
/// `n`-values.
pub fn coefficient_fit(params: &EnsembleParams, disks: &DiskSystem, n_values: &[usize]) -> Result<CoefficientFit> {
    check_n_values(n_values, 6)?;
    let exact = exact_log_mgfs(params, disks, n_values, Execution::default())?;
    let basis = |n: f64| [n, n.sqrt(), 1.0, 1.0 / n.sqrt()];
    let mut a = DMatrix::from_fn(n_values.len(), 4, |i, k| basis(n_values[i] as f64)[k]);
    let mut scale = [0.0; 4];
    for (k, s) in scale.iter_mut().enumerate() {
        *s = a.column(k).norm();
        a.column_mut(k).scale_mut(1.0 / *s);
    }
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("condition number {condition:e} over n-range")));
    }
    let x = svd
        .solve(&DVector::from_vec(exact), 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let fitted = [x[0] / scale[0], x[1] / scale[1], x[2] / scale[2], x[3] / scale[3]];
    let c = theorem_coefficients_with(params, disks, &QuadOptions::default())?;
    let theorem = [c.c1, c.c2, c.c3, c.c4];
    let deviation = [0, 1, 2, 3].map(|k| fitted[k] - theorem[k]);
    Ok(CoefficientFit {
        n_values: n_values.to_vec(),
        fitted,
        theorem,
        deviation,
        condition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub num_samples: usize,
    pub seed: u64,
    pub bulk_radii: Vec<f64>,
    pub s_frak: Option<f64>,
    pub means: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// `max |Cov − I|` entrywise.
    pub max_deviation: f64,
}

/// Empirical covariance of the normalized counts of bulk disks (radii
/// below `b^{−1/(2b)}`) and an optional edge disk.
pub fn clt_experiment(
    params: &EnsembleParams,
    bulk_radii: &[f64],
    s_frak: Option<f64>,
    num_samples: usize,
    seed: u64,
) -> Result<CltReport> {
    params.validate()?;
    let (b, n) = (params.b, params.n as f64);
    let mut disks: Vec<Disk> = bulk_radii.iter().map(|&r| Disk::fixed(r, 0.0)).collect();
    if let Some(s) = s_frak {
        disks.push(Disk::edge(s, 0.0));
    }
    let dim = disks.len();
    if dim == 0 {
        return invalid("need at least one disk");
    }
    let system = DiskSystem::new(disks)?;
    for &r in bulk_radii {
        if r >= params.critical_radius() {
            return invalid(format!("bulk radius {r} is not inside the support"));
        }
    }
    let needed = 10 * dim.max(2);
    if num_samples < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: num_samples,
        });
    }
    let batch = sample_counts(params, &system, num_samples, seed)?;
    let n4 = n.powf(0.25);
    let mut affine: Vec<(f64, f64)> = bulk_radii
        .iter()
        .map(|&r| {
            let centre = b * r.powf(2.0 * b) * n;
            let scale = std::f64::consts::PI.powf(0.25) / ((b * r.powf(b)).sqrt() * n4);
            (centre, scale)
        })
        .collect();
    if let Some(s) = s_frak {
        let c1 = edge_closed_form(1, b, params.alpha, s)?.c;
        let c2 = edge_closed_form(2, b, params.alpha, s)?.c;
        affine.push((n + c1 * n.sqrt(), 1.0 / (c2.sqrt() * n4)));
    }
    let cols: Vec<Vec<f64>> = (0..dim)
        .map(|d| {
            let (centre, scale) = affine[d];
            batch.column(d).iter().map(|x| (x - centre) * scale).collect()
        })
        .collect();
    let m = num_samples as f64;
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / m).collect();
    let mut covariance = vec![vec![0.0; dim]; dim];
    let mut max_deviation: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let cov = cols[i].iter().zip(&cols[j]).map(|(x, y)| (x - means[i]) * (y - means[j])).sum::<f64>() / (m - 1.0);
            covariance[i][j] = cov;
            let target = if i == j { 1.0 } else { 0.0 };
            max_deviation = max_deviation.max((cov - target).abs());
        }
    }
    Ok(CltReport {
        n: params.n,
        num_samples,
        seed,
        bulk_radii: bulk_radii.to_vec(),
        s_frak,
        means,
        covariance,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZnScan {
    pub b: f64,
    pub alpha: f64,
    pub n_values: Vec<usize>,
    /// `log Z_n − expansion` with the displayed terms only.
    pub residuals: Vec<f64>,
    pub fitted_rate: f64,
    pub inverse_n_coefficient: f64,
    /// Rate after also subtracting the `n⁻¹` term.
    pub corrected_rate: f64,
}

pub fn zn_residual_scan(b: f64, alpha: f64, n_values: &[usize], cap: u64) -> Result<ZnScan> {
    check_n_values(n_values, 2)?;
    let residuals: Vec<f64> = n_values
        .iter()
        .map(|&n| zn_residual(&EnsembleParams::new(b, alpha, n)?, cap))
        .collect::<Result<_>>()?;
    let c = zn_expansion_with_cap(&EnsembleParams::new(b, alpha, n_values[0])?, cap)?.inverse_n_coefficient;
    let ns: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    let corrected: Vec<f64> = residuals.iter().zip(&ns).map(|(r, n)| r - c / n).collect();
    Ok(ZnScan {
        b,
        alpha,
        n_values: n_values.to_vec(),
        fitted_rate: log_log_slope(&ns, &residuals),
        corrected_rate: log_log_slope(&ns, &corrected),
        residuals,
        inverse_n_coefficient: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ginibre(n: usize) -> EnsembleParams {
        EnsembleParams::new(1.0, 0.0, n).unwrap()
    }

    #[test]
    fn slope_of_power_law() {
        let x = [10.0, 20.0, 40.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| -3.0 * v.powf(-1.5)).collect();
        assert!((log_log_slope(&x, &y) + 1.5).abs() < 1e-14);
    }

    #[test]
    fn scan_input_validation() {
        let d = DiskSystem::new(vec![Disk::fixed(0.6, 1.0)]).unwrap();
        let p = ginibre(100);
        assert!(residual_scan(&p, &d, &[100, 200, 400]).is_err());
        assert!(residual_scan(&p, &d, &[100, 200, 400, 700]).is_err());
        assert!(residual_scan(&p, &d, &[40, 200, 400, 800]).is_err());
        assert!(residual_scan(&p, &d, &[100, 400, 200, 800]).is_err());
    }

    #[test]
    fn zero_weights_are_below_noise() {
        let d = DiskSystem::new(vec![Disk::fixed(0.6, 0.0)]).unwrap();
        let err = residual_scan(&ginibre(100), &d, &[100, 200, 400, 800]).unwrap_err();
        assert_eq!(err, Error::BelowNoise);
    }

    #[test]
    fn bulk_residual_decays() {
        let d = DiskSystem::new(vec![Disk::fixed(0.6, 1.0)]).unwrap();
        let s = residual_scan(&ginibre(100), &d, &[100, 200, 400, 800]).unwrap();
        assert!(s.fitted.iter().all(|&f| f));
        assert!(s.fitted_rate < -0.7 && s.fitted_rate > -1.4, "{}", s.fitted_rate);
    }

    #[test]
    fn fit_needs_six_points_and_spread() {
        let d = DiskSystem::new(vec![Disk::fixed(0.6, 1.0)]).unwrap();
        assert!(coefficient_fit(&ginibre(100), &d, &[100, 200, 400, 800, 1600]).is_err());
        let narrow = [1000, 1001, 1002, 1003, 1004, 1005];
        assert!(matches!(coefficient_fit(&ginibre(100), &d, &narrow), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn fit_recovers_leading_coefficients() {
        let d = DiskSystem::new(vec![Disk::fixed(0.6, 1.0)]).unwrap();
        let f = coefficient_fit(&ginibre(100), &d, &[500, 1000, 2000, 3000, 4000, 6000, 8000]).unwrap();
        assert!(f.deviation[0].abs() <= 1e-6, "{:?}", f.deviation);
        assert!(f.deviation[1].abs() <= 1e-3, "{:?}", f.deviation);
    }

    #[test]
    fn zero_weights_fit_to_zero() {
        let d = DiskSystem::new(vec![Disk::fixed(0.6, 0.0)]).unwrap();
        let f = coefficient_fit(&ginibre(100), &d, &[100, 200, 400, 800, 1600, 3200]).unwrap();
        assert!(f.fitted.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn clt_rejects_tiny_batches() {
        let p = ginibre(100);
        assert!(matches!(
            clt_experiment(&p, &[0.5], Some(0.0), 5, 1),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(clt_experiment(&p, &[1.5], None, 100, 1).is_err());
    }
}
