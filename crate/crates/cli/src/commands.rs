use std::fmt;

use ml_counts::asymptotics::{
    bulk_cumulant_coeffs, edge_cumulant_coeffs, outside_cumulant_coeffs, theorem_coefficients_with, zn_expansion_with_cap,
    zn_residual, CumulantSeries,
};
use ml_counts::ensemble::Placement;
use ml_counts::exact::{joint_cumulants_exact, log_mgf_exact, log_partition_exact};
use ml_counts::quad::QuadOptions;
use ml_counts::sampler::{mc_cumulants, sample_counts};
use ml_counts::specfun::{gamma_regime, reg_lower_gamma};
use ml_counts::verify::{clt_experiment, residual_scan_with};
use ml_counts::{DiskSystem, EnsembleParams, RadiusSpec};
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => crate::EXIT_INPUT,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<ml_counts::Error> for CliError {
    fn from(e: ml_counts::Error) -> Self {
        match e {
            ml_counts::Error::Numerical(_) | ml_counts::Error::NoConvergence(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<String> for CliError {
    fn from(m: String) -> Self {
        CliError::Input(m)
    }
}

impl From<&str> for CliError {
    fn from(m: &str) -> Self {
        CliError::Input(m.to_string())
    }
}

pub struct Outcome {
    pub text: String,
    /// `Some` for verification commands.
    pub pass: Option<bool>,
}

type Res<T> = Result<T, CliError>;

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn emit(config: &RunConfig, value: Value, csv: impl FnOnce() -> Res<String>, pass: Option<bool>) -> Res<Outcome> {
    let text = match config.output.format {
        Format::Json => json_text(&value),
        Format::Csv => csv()?,
    };
    Ok(Outcome { text, pass })
}

fn params_json(p: &EnsembleParams) -> Value {
    json!({"b": p.b, "alpha": p.alpha, "n": p.n})
}

fn disks_json(params: &EnsembleParams, disks: &DiskSystem) -> Res<Value> {
    let radii = disks.resolve(params)?;
    let regimes = disks.regimes(params.b)?;
    Ok(Value::Array(
        disks
            .disks()
            .iter()
            .zip(radii)
            .zip(regimes)
            .enumerate()
            .map(|(i, ((d, r), reg))| {
                let mut v = json!({"index": i, "r": r, "u": d.u, "regime": reg});
                if let RadiusSpec::Edge(s) = d.radius {
                    v["s_frak"] = json!(s);
                }
                v
            })
            .collect(),
    ))
}

fn unit_orders(p: usize, disk: usize, order: usize) -> Vec<usize> {
    let mut k = vec![0; p];
    k[disk] = order;
    k
}

pub fn run(config: &RunConfig) -> Res<Outcome> {
    match config.subcommand.as_str() {
        "mgf-exact" => mgf_exact(config),
        "mgf-asymptotic" => mgf_asymptotic(config),
        "coeffs" => coeffs(config),
        "cumulants" => cumulants(config),
        "zn" => zn(config),
        "sample" => sample(config),
        "verify-residual" => verify_residual(config),
        "verify-clt" => verify_clt(config),
        "specfun-test" => specfun_test(config),
        other => Err(CliError::Input(format!("unknown subcommand {other}"))),
    }
}

fn mgf_exact(config: &RunConfig) -> Res<Outcome> {
    let params = config.params()?;
    let disks = config.disk_system()?;
    let orders = config.options.orders.clone().unwrap_or_default();
    let log_mgf = log_mgf_exact(&params, &disks)?;
    let p = disks.len();
    let idx: Vec<(usize, usize)> = (0..p).flat_map(|d| orders.iter().map(move |&o| (d, o))).collect();
    let multi: Vec<Vec<usize>> = idx.iter().map(|&(d, o)| unit_orders(p, d, o)).collect();
    let values = joint_cumulants_exact(&params, &disks, &multi)?;
    let cumulants: Vec<Value> = idx
        .iter()
        .zip(&values)
        .map(|(&(d, o), v)| json!({"disk": d, "order": o, "value": v}))
        .collect();
    let value = json!({
        "params": params_json(&params),
        "disks": disks_json(&params, &disks)?,
        "log_mgf": log_mgf,
        "cumulants": cumulants,
    });
    emit(
        config,
        value,
        || {
            let mut rows = vec![vec!["log_mgf".into(), String::new(), String::new(), log_mgf.to_string()]];
            rows.extend(
                idx.iter()
                    .zip(&values)
                    .map(|(&(d, o), v)| vec!["cumulant".into(), d.to_string(), o.to_string(), v.to_string()]),
            );
            csv_text(&["quantity", "disk", "order", "value"], rows)
        },
        None,
    )
}

fn quad_opts(config: &RunConfig) -> QuadOptions {
    QuadOptions {
        abs_tol: config.tolerances.get("quad_abs").copied().unwrap_or(1e-12),
        ..QuadOptions::default()
    }
}

fn mgf_asymptotic(config: &RunConfig) -> Res<Outcome> {
    let params = config.params()?;
    let disks = config.disk_system()?;
    let c = theorem_coefficients_with(&params, &disks, &quad_opts(config))?;
    let predicted = c.evaluate(params.n as f64);
    let value = json!({
        "params": params_json(&params),
        "disks": disks_json(&params, &disks)?,
        "log_mgf": predicted,
        "C1": c.c1, "C2": c.c2, "C3": c.c3, "C4": c.c4,
        "quad_error": c.quad_error,
        "degenerate_edge": c.degenerate_edge,
    });
    emit(
        config,
        value,
        || {
            csv_text(
                &["n", "log_mgf", "C1", "C2", "C3", "C4", "quad_error"],
                vec![[params.n as f64, predicted, c.c1, c.c2, c.c3, c.c4, c.quad_error]
                    .iter()
                    .map(|x| x.to_string())
                    .collect()],
            )
        },
        None,
    )
}

fn coeffs(config: &RunConfig) -> Res<Outcome> {
    let params = config.shape_params()?;
    let disks = config.disk_system()?;
    let c = theorem_coefficients_with(&params, &disks, &quad_opts(config))?;
    let value = serde_json::to_value(&c).map_err(|e| CliError::Internal(e.to_string()))?;
    emit(
        config,
        value,
        || {
            let rows = c
                .per_disk_breakdown
                .iter()
                .map(|d| {
                    vec![
                        params.b.to_string(),
                        params.alpha.to_string(),
                        d.index.to_string(),
                        format!("{:?}", d.regime).to_lowercase(),
                        opt(d.r),
                        opt(d.s_frak),
                        d.u.to_string(),
                        d.c1.to_string(),
                        d.c2.to_string(),
                        d.c3.to_string(),
                        d.c4.to_string(),
                        d.quad_error.to_string(),
                    ]
                })
                .collect();
            csv_text(
                &["b", "alpha", "disk", "regime", "r", "s_frak", "u", "C1", "C2", "C3", "C4", "quad_error"],
                rows,
            )
        },
        None,
    )
}

fn series_for(params: &EnsembleParams, placement: Placement, order: usize) -> Res<CumulantSeries> {
    Ok(match placement {
        Placement::Bulk { r } => bulk_cumulant_coeffs(order, params.b, params.alpha, r)?,
        Placement::Edge { s_frak } => edge_cumulant_coeffs(order, params.b, params.alpha, s_frak)?,
        Placement::Outside { .. } => outside_cumulant_coeffs(order)?,
    })
}

fn cumulants(config: &RunConfig) -> Res<Outcome> {
    let params = config.params()?;
    let disks = config.disk_system()?;
    let orders = config.options.orders.clone().unwrap_or_default();
    let placements = disks.placements(params.b)?;
    let radii = disks.resolve(&params)?;
    let p = disks.len();
    let nf = params.n as f64;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (d, &pl) in placements.iter().enumerate() {
        for &o in &orders {
            let exact = joint_cumulants_exact(&params, &disks, &[unit_orders(p, d, o)])?[0];
            let s = series_for(&params, pl, o)?;
            let predicted = s.evaluate(nf);
            let (r, sf) = match pl {
                Placement::Edge { s_frak } => (None, Some(s_frak)),
                _ => (Some(radii[d]), None),
            };
            rows.push(vec![
                params.b.to_string(),
                params.alpha.to_string(),
                opt(r),
                opt(sf),
                o.to_string(),
                s.leading.to_string(),
                s.c.to_string(),
                s.d.to_string(),
                s.e.to_string(),
                exact.to_string(),
                predicted.to_string(),
            ]);
            entries.push(json!({
                "disk": d,
                "order": o,
                "exact": exact,
                "predicted": predicted,
                "series": s,
            }));
        }
    }
    let value = json!({
        "params": params_json(&params),
        "disks": disks_json(&params, &disks)?,
        "cumulants": entries,
    });
    emit(
        config,
        value,
        || {
            csv_text(
                &["b", "alpha", "r", "s_frak", "order", "leading", "c", "d", "e", "exact", "predicted"],
                rows,
            )
        },
        None,
    )
}

fn zn(config: &RunConfig) -> Res<Outcome> {
    let params = config.params()?;
    let cap = config.options.cap.unwrap_or(64);
    let exact = log_partition_exact(&params)?;
    let e = zn_expansion_with_cap(&params, cap)?;
    let residual = if e.constant.is_some() {
        Some(zn_residual(&params, cap)?)
    } else {
        None
    };
    let value = json!({
        "params": params_json(&params),
        "exact": exact,
        "expansion": e,
        "residual": residual,
    });
    emit(
        config,
        value,
        || {
            csv_text(
                &["b", "alpha", "n", "exact", "expansion", "constant", "residual"],
                vec![vec![
                    params.b.to_string(),
                    params.alpha.to_string(),
                    params.n.to_string(),
                    exact.to_string(),
                    e.value.to_string(),
                    opt(e.constant),
                    opt(residual),
                ]],
            )
        },
        None,
    )
}

fn sample(config: &RunConfig) -> Res<Outcome> {
    let params = config.params()?;
    let disks = config.disk_system()?;
    let samples = config.options.samples.unwrap_or(10_000);
    let seed = config.seed.unwrap_or(0);
    let batch = sample_counts(&params, &disks, samples, seed)?;
    if config.output.format == Format::Csv {
        let header: Vec<String> = std::iter::once("sample".to_string())
            .chain((0..batch.disks).map(|d| format!("disk_{d}")))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..batch.num_samples)
            .map(|s| {
                std::iter::once(s.to_string())
                    .chain(batch.row(s).iter().map(|c| c.to_string()))
                    .collect()
            })
            .collect();
        return Ok(Outcome {
            text: csv_text(&header, rows)?,
            pass: None,
        });
    }
    let est = mc_cumulants(&batch, config.options.max_order.unwrap_or(4).max(2))?;
    let summary: Vec<Value> = est
        .iter()
        .enumerate()
        .map(|(d, k)| {
            json!({
                "disk": d,
                "mean": k[0].value,
                "var": k[1].value,
                "cumulants": k.iter().map(|e| e.value).collect::<Vec<_>>(),
                "se": k.iter().map(|e| e.se).collect::<Vec<_>>(),
            })
        })
        .collect();
    let value = json!({
        "params": params_json(&params),
        "disks": disks_json(&params, &disks)?,
        "num_samples": samples,
        "seed": seed,
        "summary": summary,
    });
    emit(config, value, || unreachable!(), None)
}

fn report(experiment: &str, inputs: Value, outputs: Value, pass: bool, config: &RunConfig) -> Value {
    json!({
        "experiment": experiment,
        "inputs": inputs,
        "outputs": outputs,
        "pass": pass,
        "tolerances": config.tolerances,
    })
}

fn verify_residual(config: &RunConfig) -> Res<Outcome> {
    let params = config.shape_params()?;
    let disks = config.disk_system()?;
    let n_values = config.options.n_values.clone().unwrap_or_default();
    let opts = quad_opts(config);
    let scan = residual_scan_with(&params, &disks, &n_values, &opts)?;
    let fine = residual_scan_with(
        &params,
        &disks,
        &n_values,
        &QuadOptions {
            abs_tol: opts.abs_tol / 10.0,
            ..opts
        },
    )?;
    let (lo, hi) = (config.tolerance("rate_min"), config.tolerance("rate_max"));
    let monotone = scan.residuals.windows(2).all(|w| w[1].abs() < w[0].abs());
    let stable = (scan.fitted_rate - fine.fitted_rate).abs() <= config.tolerance("noise_rerun_rate");
    let in_range = scan.fitted_rate >= lo && scan.fitted_rate <= hi;
    let pass = monotone && stable && in_range;
    let inputs = json!({
        "params": {"b": params.b, "alpha": params.alpha},
        "disks": config.disks,
        "n_values": n_values,
    });
    let outputs = json!({
        "scan": scan,
        "fitted_rate_fine_quadrature": fine.fitted_rate,
        "monotone": monotone,
    });
    let value = report("residual_scan", inputs, outputs, pass, config);
    emit(
        config,
        value,
        || {
            let rows = scan
                .n_values
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    vec![
                        n.to_string(),
                        scan.exact[i].to_string(),
                        scan.predicted[i].to_string(),
                        scan.residuals[i].to_string(),
                        scan.noise_floor[i].to_string(),
                        scan.fitted[i].to_string(),
                    ]
                })
                .collect();
            csv_text(&["n", "exact", "predicted", "residual", "noise_floor", "fitted"], rows)
        },
        Some(pass),
    )
}

fn verify_clt(config: &RunConfig) -> Res<Outcome> {
    let params = config.params()?;
    let bulk: Vec<f64> = config.disks.iter().filter_map(|d| d.r).collect();
    let s = config.disks.iter().find_map(|d| d.s_frak);
    let samples = config.options.samples.unwrap_or(100_000);
    let seed = config.seed.unwrap_or(0);
    let rep = clt_experiment(&params, &bulk, s, samples, seed)?;
    let pass = rep.max_deviation <= config.tolerance("max_abs_deviation");
    let inputs = json!({
        "params": params_json(&params),
        "bulk_radii": bulk,
        "s_frak": s,
        "num_samples": samples,
        "seed": seed,
    });
    let outputs = serde_json::to_value(&rep).map_err(|e| CliError::Internal(e.to_string()))?;
    let value = report("clt", inputs, outputs, pass, config);
    emit(
        config,
        value,
        || {
            let rows = rep
                .covariance
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, c)| vec![i.to_string(), j.to_string(), c.to_string()]))
                .collect();
            csv_text(&["i", "j", "covariance"], rows)
        },
        Some(pass),
    )
}

fn specfun_test(config: &RunConfig) -> Res<Outcome> {
    let path = config.options.oracle.as_deref().ok_or("--oracle is required")?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let headers = reader.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("oracle CSV lacks column {name}")))
    };
    let (ia, il, iz, ip) = (col("a")?, col("lambda")?, col("z")?, col("p")?);
    let mut rows = Vec::new();
    let mut max_err: f64 = 0.0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Input(e.to_string()))?;
        let num = |i: usize| -> Res<f64> {
            rec[i]
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad number {:?}", &rec[i])))
        };
        let (a, lambda, z, p) = (num(ia)?, num(il)?, num(iz)?, num(ip)?);
        let err = (reg_lower_gamma(a, z)? - p).abs();
        max_err = max_err.max(err);
        rows.push(vec![
            a.to_string(),
            lambda.to_string(),
            gamma_regime(a, z).name().to_string(),
            err.to_string(),
        ]);
    }
    let value = json!({"points": rows.len(), "max_abs_err": max_err});
    emit(config, value, || csv_text(&["a", "lambda", "regime", "abs_err_vs_oracle"], rows), None)
}
