//! Ensemble parameters and disk configurations.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Relative distance below which two radii are considered equal.
pub const RADIUS_REL_GAP: f64 = 1e-12;

/// `(b, α, n)` for the weight `|z|^{2α} e^{−n|z|^{2b}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub b: f64,
    pub alpha: f64,
    pub n: usize,
}

impl EnsembleParams {
    pub fn new(b: f64, alpha: f64, n: usize) -> Result<Self> {
        let p = EnsembleParams { b, alpha, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return invalid(format!("b must be a positive finite number, got {}", self.b));
        }
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return invalid(format!("alpha must exceed -1, got {}", self.alpha));
        }
        if self.n == 0 {
            return invalid("n must be at least 1");
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        EnsembleParams { n, ..*self }
    }

    /// Radius of the support of the equilibrium measure, `b^{−1/(2b)}`.
    pub fn critical_radius(&self) -> f64 {
        critical_radius(self.b)
    }

    /// Shape parameter `(j + α)/b` of the `j`-th radial factor (`j ≥ 1`).
    pub fn shape(&self, j: usize) -> f64 {
        (j as f64 + self.alpha) / self.b
    }
}

pub fn critical_radius(b: f64) -> f64 {
    b.powf(-0.5 / b)
}

/// `b^{−1/(2b)}(1 + √(2b)𝔰/√n)^{1/(2b)}`, or `None` when the base is not positive.
pub fn edge_radius(b: f64, s_frak: f64, n: usize) -> Option<f64> {
    let base = 1.0 + (2.0 * b).sqrt() * s_frak / (n as f64).sqrt();
    (base > 0.0).then(|| critical_radius(b) * base.powf(0.5 / b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusSpec {
    Fixed(f64),
    /// Edge-scaled radius with parameter 𝔰.
    Edge(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub radius: RadiusSpec,
    pub u: f64,
}

impl Disk {
    pub fn fixed(r: f64, u: f64) -> Self {
        Disk {
            radius: RadiusSpec::Fixed(r),
            u,
        }
    }

    pub fn edge(s_frak: f64, u: f64) -> Self {
        Disk {
            radius: RadiusSpec::Edge(s_frak),
            u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bulk,
    Edge,
    Outside,
}

/// Classification of one disk relative to the critical radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    Bulk { r: f64 },
    Edge { s_frak: f64 },
    Outside { r: f64 },
}

impl Placement {
    pub fn regime(&self) -> Regime {
        match self {
            Placement::Bulk { .. } => Regime::Bulk,
            Placement::Edge { .. } => Regime::Edge,
            Placement::Outside { .. } => Regime::Outside,
        }
    }
}

/// Nested disks `D_{r₁} ⊂ … ⊂ D_{r_p}` with weights `u_ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSystem {
    disks: Vec<Disk>,
}

impl DiskSystem {
    /// Validates the configuration that does not depend on `b` or `n`.
    pub fn new(disks: Vec<Disk>) -> Result<Self> {
        if disks.is_empty() {
            return invalid("at least one disk is required");
        }
        let mut edges = 0;
        for d in &disks {
            if !d.u.is_finite() {
                return invalid(format!("u must be finite, got {}", d.u));
            }
            match d.radius {
                RadiusSpec::Fixed(r) if !(r > 0.0) || !r.is_finite() => {
                    return invalid(format!("radius must be positive and finite, got {r}"));
                }
                RadiusSpec::Edge(s) if !s.is_finite() => {
                    return invalid(format!("s must be finite, got {s}"));
                }
                RadiusSpec::Edge(_) => edges += 1,
                _ => {}
            }
        }
        if edges > 1 {
            return invalid("at most one edge disk is allowed");
        }
        Ok(DiskSystem { disks })
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    pub fn u(&self) -> Vec<f64> {
        self.disks.iter().map(|d| d.u).collect()
    }

    /// Same radii with new weights.
    pub fn with_u(&self, u: &[f64]) -> Result<Self> {
        if u.len() != self.disks.len() {
            return invalid(format!("expected {} weights, got {}", self.disks.len(), u.len()));
        }
        let disks = self
            .disks
            .iter()
            .zip(u)
            .map(|(d, &u)| Disk { radius: d.radius, u })
            .collect();
        DiskSystem::new(disks)
    }

    /// Bulk / edge / outside placement for potential exponent `b`. A fixed
    /// radius within [`RADIUS_REL_GAP`] of the critical radius is the edge
    /// disk with 𝔰 = 0.
    pub fn placements(&self, b: f64) -> Result<Vec<Placement>> {
        let rc = critical_radius(b);
        let out: Vec<Placement> = self
            .disks
            .iter()
            .map(|d| match d.radius {
                RadiusSpec::Edge(s_frak) => Placement::Edge { s_frak },
                RadiusSpec::Fixed(r) if ((r - rc) / rc).abs() <= RADIUS_REL_GAP => {
                    Placement::Edge { s_frak: 0.0 }
                }
                RadiusSpec::Fixed(r) if r < rc => Placement::Bulk { r },
                RadiusSpec::Fixed(r) => Placement::Outside { r },
            })
            .collect();
        if out.iter().filter(|p| p.regime() == Regime::Edge).count() > 1 {
            return invalid("at most one edge disk is allowed (a fixed radius equals the critical radius)");
        }
        let rank = |p: &Placement| match p.regime() {
            Regime::Bulk => 0,
            Regime::Edge => 1,
            Regime::Outside => 2,
        };
        for (i, w) in out.windows(2).enumerate() {
            let increasing = match (w[0], w[1]) {
                (Placement::Bulk { r: a }, Placement::Bulk { r: c })
                | (Placement::Outside { r: a }, Placement::Outside { r: c }) => c > a,
                (x, y) => rank(&y) > rank(&x),
            };
            if !increasing {
                return invalid(format!("disks {} and {} are not in increasing radius order", i + 1, i + 2));
            }
        }
        Ok(out)
    }

    pub fn regimes(&self, b: f64) -> Result<Vec<Regime>> {
        Ok(self.placements(b)?.iter().map(Placement::regime).collect())
    }

    /// Radii at particle number `params.n`, checked to be strictly increasing.
    pub fn resolve(&self, params: &EnsembleParams) -> Result<Vec<f64>> {
        params.validate()?;
        self.placements(params.b)?;
        let mut radii = Vec::with_capacity(self.disks.len());
        for d in &self.disks {
            let r = match d.radius {
                RadiusSpec::Fixed(r) => r,
                RadiusSpec::Edge(s) => match edge_radius(params.b, s, params.n) {
                    Some(r) => r,
                    None => {
                        return invalid(format!(
                            "edge radius undefined: 1 + sqrt(2b)*s/sqrt(n) <= 0 for s = {s}, n = {}",
                            params.n
                        ))
                    }
                },
            };
            radii.push(r);
        }
        for (i, w) in radii.windows(2).enumerate() {
            if !(w[1] > w[0] * (1.0 + RADIUS_REL_GAP)) {
                return invalid(format!(
                    "radii must be strictly increasing at n = {}: r{} = {} vs r{} = {}",
                    params.n,
                    i + 1,
                    w[0],
                    i + 2,
                    w[1]
                ));
            }
        }
        Ok(radii)
    }
}

/// Weights of the piecewise-constant radial factor: `Ω_ℓ = e^{u_ℓ+…+u_p}`
/// for `ℓ = 1..=p` and `ω_ℓ = Ω_ℓ − Ω_{ℓ+1}` with `Ω_{p+1} = 1`.
///
/// Returns `(ω, Ω − 1)`; both are formed from `expm1` so that small weights
/// keep their relative precision.
pub fn omega_weights<S: Scalar>(u: &[S]) -> (Vec<S>, Vec<S>) {
    let p = u.len();
    let mut tail = vec![S::zero(); p + 1];
    for l in (0..p).rev() {
        tail[l] = tail[l + 1] + u[l];
    }
    let omega = (0..p).map(|l| tail[l + 1].exp() * u[l].exp_m1()).collect();
    let big_minus_one = (0..p).map(|l| tail[l].exp_m1()).collect();
    (omega, big_minus_one)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(EnsembleParams::new(1.0, 0.0, 1).is_ok());
        assert!(EnsembleParams::new(0.0, 0.0, 1).is_err());
        assert!(EnsembleParams::new(1.0, -1.0, 1).is_err());
        assert!(EnsembleParams::new(1.0, 0.0, 0).is_err());
        assert!(EnsembleParams::new(f64::NAN, 0.0, 3).is_err());
    }

    #[test]
    fn critical_radius_values() {
        assert_eq!(critical_radius(1.0), 1.0);
        assert!((critical_radius(2.0) - 2f64.powf(-0.25)).abs() < 1e-16);
        assert!((edge_radius(1.0, 0.0, 100).unwrap() - 1.0).abs() < 1e-16);
        let r = edge_radius(1.0, 1.0, 100).unwrap();
        assert!((r * r - (1.0 + 2f64.sqrt() / 10.0)).abs() < 1e-15);
        assert!(edge_radius(1.0, -10.0, 50).is_none());
    }

    #[test]
    fn classification_and_order() {
        let ds = DiskSystem::new(vec![Disk::fixed(0.5, 1.0), Disk::edge(0.3, 1.0), Disk::fixed(1.4, 1.0)]).unwrap();
        assert_eq!(ds.regimes(1.0).unwrap(), vec![Regime::Bulk, Regime::Edge, Regime::Outside]);
        let bad = DiskSystem::new(vec![Disk::fixed(1.4, 1.0), Disk::edge(0.3, 1.0)]).unwrap();
        assert!(bad.regimes(1.0).is_err());
        assert!(DiskSystem::new(vec![Disk::edge(0.0, 1.0), Disk::edge(1.0, 1.0)]).is_err());
        let at_edge = DiskSystem::new(vec![Disk::fixed(1.0, 1.0)]).unwrap();
        assert_eq!(at_edge.placements(1.0).unwrap(), vec![Placement::Edge { s_frak: 0.0 }]);
        let two = DiskSystem::new(vec![Disk::fixed(1.0, 1.0), Disk::edge(0.5, 1.0)]).unwrap();
        assert!(two.placements(1.0).is_err());
    }

    #[test]
    fn resolve_rejects_equal_or_crossing_radii() {
        let p = EnsembleParams::new(1.0, 0.0, 100).unwrap();
        let eq = DiskSystem::new(vec![Disk::fixed(0.5, 0.0), Disk::fixed(0.5 * (1.0 + 1e-14), 0.0)]).unwrap();
        assert!(eq.resolve(&p).is_err());
        // The edge radius at s = 5, n = 2 exceeds the outside disk at 1.2.
        let cross = DiskSystem::new(vec![Disk::edge(5.0, 0.0), Disk::fixed(1.2, 0.0)]).unwrap();
        assert!(cross.resolve(&p.with_n(2)).is_err());
        assert!(cross.resolve(&p.with_n(100_000)).is_ok());
        let neg = DiskSystem::new(vec![Disk::edge(-3.0, 0.0)]).unwrap();
        assert!(neg.resolve(&p.with_n(4)).is_err());
    }

    #[test]
    fn omega_identities() {
        let u = [0.3, -1.2, 0.05];
        let (omega, big) = omega_weights(&u);
        // Ω_ℓ = Σ_{k≥ℓ} ω_k + 1
        for l in 0..3 {
            let s: f64 = omega[l..].iter().sum();
            assert!((s - big[l]).abs() < 1e-15);
        }
        assert!((omega[2] - 0.05f64.exp_m1()).abs() < 1e-17);
        assert!((omega[0] - ((-1.2f64 + 0.05 + 0.3).exp() - (-1.2f64 + 0.05).exp())).abs() < 1e-15);
    }
}
