//! Monte Carlo disk counts.
//!
//! The MGF factorizes over `j` into Bernoulli factors, which is the law of
//! independent moduli with `n R_j^{2b} ~ Gamma((j+α)/b, 1)`. Angles do not
//! affect disk counts and are not drawn.
//!
//! Sample `s` uses its own ChaCha stream (`seed`, stream `s`) and draws
//! `G_1, …, G_n` in order, so output does not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::ensemble::{DiskSystem, EnsembleParams};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

/// Highest order of the k-statistics.
pub const MAX_MC_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleBatch {
    pub n: usize,
    pub seed: u64,
    pub num_samples: usize,
    pub disks: usize,
    /// Row-major `num_samples × disks`.
    pub counts: Vec<u32>,
}

impl SampleBatch {
    pub fn row(&self, s: usize) -> &[u32] {
        &self.counts[s * self.disks..(s + 1) * self.disks]
    }

    pub fn column(&self, disk: usize) -> Vec<f64> {
        (0..self.num_samples).map(|s| self.counts[s * self.disks + disk] as f64).collect()
    }
}

fn gammas(params: &EnsembleParams) -> Result<Vec<Gamma<f64>>> {
    (1..=params.n)
        .map(|j| Gamma::new(params.shape(j), 1.0).map_err(|e| Error::InvalidInput(format!("gamma shape: {e}"))))
        .collect()
}

fn stream(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

/// `n R_j^{2b}` for `j = 1..n` in sample `sample` of the keyed stream.
pub fn sample_scaled_moduli(params: &EnsembleParams, seed: u64, sample: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = stream(seed, sample);
    Ok(gammas(params)?.iter().map(|g| g.sample(&mut rng)).collect())
}

pub fn sample_counts(params: &EnsembleParams, disks: &DiskSystem, num_samples: usize, seed: u64) -> Result<SampleBatch> {
    sample_counts_with(params, disks, num_samples, seed, Execution::default())
}

pub fn sample_counts_with(
    params: &EnsembleParams,
    disks: &DiskSystem,
    num_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampleBatch> {
    params.validate()?;
    if num_samples == 0 {
        return invalid("num_samples must be at least 1");
    }
    let radii = disks.resolve(params)?;
    let nf = params.n as f64;
    let thresholds: Vec<f64> = radii.iter().map(|r| nf * r.powf(2.0 * params.b)).collect();
    let dists = gammas(params)?;
    let p = thresholds.len();
    let rows = exec.map(num_samples, |s| {
        let mut rng = stream(seed, s);
        let mut hist = vec![0u32; p + 1];
        for g in &dists {
            let x = g.sample(&mut rng);
            hist[thresholds.partition_point(|&z| z <= x)] += 1;
        }
        let mut acc = 0;
        hist[..p]
            .iter()
            .map(|&h| {
                acc += h;
                acc
            })
            .collect::<Vec<u32>>()
    });
    Ok(SampleBatch {
        n: params.n,
        seed,
        num_samples,
        disks: p,
        counts: rows.concat(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantEstimate {
    pub order: usize,
    pub value: f64,
    /// Jackknife standard error.
    pub se: f64,
}

/// k-statistics `k₁ … k_m` from power sums of data shifted by `shift`.
fn k_statistics(s: &[f64; 5], n: f64, shift: f64, max_order: usize) -> [f64; MAX_MC_ORDER] {
    let (s1, s2, s3, s4) = (s[1], s[2], s[3], s[4]);
    let mut k = [0.0; MAX_MC_ORDER];
    k[0] = s1 / n + shift;
    if max_order >= 2 {
        k[1] = (n * s2 - s1 * s1) / (n * (n - 1.0));
    }
    if max_order >= 3 {
        k[2] = (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0));
    }
    if max_order >= 4 {
        k[3] = (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2 - 4.0 * n * (n + 1.0) * s1 * s3
            + n * n * (n + 1.0) * s4)
            / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
    }
    k
}

/// Unbiased k-statistics of `data` through `max_order ≤ 4` with
/// leave-one-out jackknife standard errors.
pub fn k_statistics_with_se(data: &[f64], max_order: usize) -> Result<Vec<CumulantEstimate>> {
    if max_order == 0 {
        return invalid("max_order must be at least 1");
    }
    if max_order > MAX_MC_ORDER {
        return Err(Error::OrderTooHigh {
            order: max_order,
            max: MAX_MC_ORDER,
        });
    }
    let needed = 10 * max_order;
    if data.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: data.len(),
        });
    }
    let n = data.len() as f64;
    let shift = data.iter().sum::<f64>() / n;
    let mut sums = [0.0; 5];
    for &x in data {
        let y = x - shift;
        let mut pw = 1.0;
        for s in sums.iter_mut() {
            *s += pw;
            pw *= y;
        }
    }
    let full = k_statistics(&sums, n, shift, max_order);
    // Values repeat heavily for counts; group them.
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups: Vec<(f64, [f64; MAX_MC_ORDER])> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut m = 0;
        while i < sorted.len() && sorted[i] == x {
            m += 1;
            i += 1;
        }
        let y = x - shift;
        let mut loo = sums;
        let mut pw = 1.0;
        for s in loo.iter_mut() {
            *s -= pw;
            pw *= y;
        }
        groups.push((m as f64, k_statistics(&loo, n - 1.0, shift, max_order)));
    }
    Ok((0..max_order)
        .map(|r| {
            let mean = groups.iter().map(|(m, k)| m * k[r]).sum::<f64>() / n;
            let ss = groups.iter().map(|(m, k)| m * (k[r] - mean).powi(2)).sum::<f64>();
            CumulantEstimate {
                order: r + 1,
                value: full[r],
                se: ((n - 1.0) / n * ss).sqrt(),
            }
        })
        .collect())
}

/// Per-disk k-statistics of a batch.
pub fn mc_cumulants(batch: &SampleBatch, max_order: usize) -> Result<Vec<Vec<CumulantEstimate>>> {
    (0..batch.disks).map(|d| k_statistics_with_se(&batch.column(d), max_order)).collect()
}
