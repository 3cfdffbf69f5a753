//! Run configuration and its canonical JSON form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ml_counts::{Disk, DiskSystem, EnsembleParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// One `--disk` flag: `r=<radius>` or `s=<edge parameter>`, optionally `u=<weight>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskSpec {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_frak: Option<f64>,
    pub u: f64,
}

impl DiskSpec {
    pub fn to_disk(self) -> Disk {
        match (self.r, self.s_frak) {
            (Some(r), None) => Disk::fixed(r, self.u),
            (None, Some(s)) => Disk::edge(s, self.u),
            _ => unreachable!("validated on parse"),
        }
    }
}

fn parse_float(key: &str, v: &str) -> Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("{key}: not a number: {v:?}"))?;
    if !x.is_finite() {
        return Err(format!("{key}: must be finite"));
    }
    Ok(x)
}

impl FromStr for DiskSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (mut r, mut s_frak, mut u) = (None, None, None);
        for part in s.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let slot = match k.trim() {
                "r" => &mut r,
                "s" | "s_frak" => &mut s_frak,
                "u" => &mut u,
                other => return Err(format!("unknown disk key {other:?} (expected r, s or u)")),
            };
            if slot.is_some() {
                return Err(format!("duplicate disk key {k:?}"));
            }
            *slot = Some(parse_float(k, v)?);
        }
        if r.is_some() == s_frak.is_some() {
            return Err("a disk needs exactly one of r=<radius> or s=<edge parameter>".into());
        }
        Ok(DiskSpec { r, s_frak, u: u.unwrap_or(0.0) })
    }
}

impl fmt::Display for DiskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.r, self.s_frak) {
            (Some(r), _) => write!(f, "r={r},u={}", self.u),
            (_, Some(s)) => write!(f, "s={s},u={}", self.u),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub b: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub path: Option<String>,
}

/// Subcommand-specific settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Options {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub orders: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_values: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ensemble: Option<Ensemble>,
    #[serde(default)]
    pub disks: Vec<DiskSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub options: Options,
    pub output: OutputSpec,
}

fn clean(x: f64) -> f64 {
    // -0.0 and 0.0 print differently.
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl RunConfig {
    /// Normal form: signed zeros cleared, values otherwise untouched.
    pub fn normalized(mut self) -> Self {
        if let Some(e) = self.ensemble.as_mut() {
            e.b = clean(e.b);
            e.alpha = clean(e.alpha);
        }
        for d in &mut self.disks {
            d.r = d.r.map(clean);
            d.s_frak = d.s_frak.map(clean);
            d.u = clean(d.u);
        }
        for v in self.tolerances.values_mut() {
            *v = clean(*v);
        }
        self
    }

    pub fn canonical(&self) -> String {
        serde_json::to_string(&self.clone().normalized()).expect("config serializes")
    }

    #[cfg(test)]
    pub fn from_canonical(s: &str) -> Result<Self, String> {
        serde_json::from_str::<RunConfig>(s).map(RunConfig::normalized).map_err(|e| e.to_string())
    }

    pub fn params(&self) -> Result<EnsembleParams, String> {
        let e = self.ensemble.ok_or("missing ensemble parameters")?;
        let n = e.n.ok_or("--n is required")?;
        EnsembleParams::new(e.b, e.alpha, n).map_err(|e| e.to_string())
    }

    /// `(b, α)` with a placeholder `n` for `n`-free computations.
    pub fn shape_params(&self) -> Result<EnsembleParams, String> {
        let e = self.ensemble.ok_or("missing ensemble parameters")?;
        EnsembleParams::new(e.b, e.alpha, e.n.unwrap_or(1)).map_err(|e| e.to_string())
    }

    pub fn disk_system(&self) -> Result<DiskSystem, String> {
        DiskSystem::new(self.disks.iter().map(|d| d.to_disk()).collect()).map_err(|e| e.to_string())
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances[key]
    }
}
