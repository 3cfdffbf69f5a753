mod common;

use ml_counts::exact::log_mgf_exact;
use ml_counts::sampler::{sample_counts, sample_counts_with, sample_scaled_moduli};
use ml_counts::specfun::reg_lower_gamma;
use ml_counts::{Disk, DiskSystem, EnsembleParams, Execution};

fn system(r: &[f64], u: &[f64]) -> DiskSystem {
    DiskSystem::new(r.iter().zip(u).map(|(&r, &u)| Disk::fixed(r, u)).collect()).unwrap()
}

#[test]
fn single_particle_kolmogorov_smirnov() {
    let p = EnsembleParams::new(1.7, 0.4, 1).unwrap();
    let m = 100_000;
    let mut x: Vec<f64> = (0..m).map(|s| sample_scaled_moduli(&p, 11, s).unwrap()[0]).collect();
    x.sort_by(f64::total_cmp);
    let shape = p.shape(1);
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = reg_lower_gamma(shape, v).unwrap();
            (f - i as f64 / m as f64).max((i + 1) as f64 / m as f64 - f)
        })
        .fold(0.0, f64::max);
    // Critical value at significance 1e-3.
    assert!(d < 1.949 / (m as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn two_particle_joint_law() {
    let p = EnsembleParams::new(1.0, 0.0, 2).unwrap();
    let m = 200_000;
    let batch = sample_counts(&p, &system(&[0.5, 0.9], &[0.0, 0.0]), m, 5).unwrap();
    for &((k1, k2), prob) in &common::TWO_PARTICLE_LAW {
        let hits = (0..m).filter(|&s| batch.row(s) == [k1, k2]).count() as f64 / m as f64;
        let se = (prob * (1.0 - prob) / m as f64).sqrt();
        assert!((hits - prob).abs() < 4.5 * se, "cell ({k1}, {k2}): {hits} vs {prob}");
    }
}

#[test]
fn empirical_mgf() {
    let p = EnsembleParams::new(1.0, 0.0, 200).unwrap();
    let disks = system(&[0.7], &[0.2]);
    let m = 40_000;
    let batch = sample_counts(&p, &disks, m, 3).unwrap();
    let emp = batch.column(0).iter().map(|k| (0.2 * k).exp()).sum::<f64>() / m as f64;
    let exact = log_mgf_exact(&p, &disks).unwrap().exp();
    assert!((emp / exact - 1.0).abs() <= 5.0 / (m as f64).sqrt());
}

#[test]
fn execution_strategy_does_not_change_draws() {
    let p = EnsembleParams::new(0.7, 1.0, 300).unwrap();
    let d = system(&[0.4, 1.0], &[0.0, 0.0]);
    let a = sample_counts_with(&p, &d, 500, 99, Execution::Sequential).unwrap();
    let b = sample_counts_with(&p, &d, 500, 99, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
