//! `ml-counts`: exact, asymptotic and Monte Carlo disk counting statistics
//! for the Mittag-Leffler ensemble.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{DiskSpec, Ensemble, Format, Options, OutputSpec, RunConfig};

const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "ml-counts", version, about = "Disk counting statistics of the Mittag-Leffler ensemble")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ML_COUNTS_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print the canonical run configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
}

#[derive(Args)]
struct DiskArgs {
    /// `r=<radius>[,u=<weight>]` or `s=<edge parameter>[,u=<weight>]`; repeat for nested disks.
    #[arg(long = "disk", required = true)]
    disks: Vec<DiskSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact log-MGF and per-disk cumulants at finite n.
    MgfExact {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        disks: DiskArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        orders: Vec<usize>,
    },
    /// Large-n prediction C1 n + C2 sqrt(n) + C3 + C4/sqrt(n).
    MgfAsymptotic {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        disks: DiskArgs,
        #[arg(long, default_value_t = 1e-12)]
        quad_tol: f64,
    },
    /// Expansion coefficients C1..C4 with a per-disk breakdown.
    Coeffs {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        disks: DiskArgs,
        #[arg(long, default_value_t = 1e-12)]
        quad_tol: f64,
    },
    /// Exact cumulants beside their large-n series.
    Cumulants {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        disks: DiskArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        orders: Vec<usize>,
    },
    /// Exact log Z_n and its large-n expansion.
    Zn {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        n: usize,
        /// Largest n1, n2 accepted for b = n1/n2.
        #[arg(long, default_value_t = 64)]
        cap: u64,
    },
    /// Monte Carlo disk counts.
    Sample {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        disks: DiskArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
    },
    /// Residual of the large-n prediction and its decay rate.
    VerifyResidual {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        disks: DiskArgs,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
        n_values: Vec<usize>,
        #[arg(long, default_value_t = -1.35, allow_negative_numbers = true)]
        rate_min: f64,
        #[arg(long, default_value_t = -0.75, allow_negative_numbers = true)]
        rate_max: f64,
    },
    /// Covariance of the normalized counts against the identity.
    VerifyClt {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long)]
        n: usize,
        /// Bulk radii.
        #[arg(long, value_delimiter = ',')]
        bulk: Vec<f64>,
        /// Edge parameter of an optional edge disk.
        #[arg(long, allow_negative_numbers = true)]
        s: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Accuracy map of P(a, z) against an oracle CSV with columns a,lambda,z,p.
    #[command(hide = true)]
    SpecfunTest {
        #[arg(long)]
        oracle: PathBuf,
    },
}

fn config_from(cli: &Cli) -> RunConfig {
    let ens = |e: &EnsembleArgs, n: Option<usize>| {
        Some(Ensemble {
            b: e.b,
            alpha: e.alpha,
            n,
        })
    };
    let mut c = RunConfig {
        subcommand: String::new(),
        ensemble: None,
        disks: Vec::new(),
        tolerances: BTreeMap::new(),
        seed: None,
        options: Options::default(),
        output: OutputSpec {
            format: cli.format,
            path: cli.output.as_ref().map(|p| p.display().to_string()),
        },
    };
    match &cli.command {
        Command::MgfExact { ens: e, n, disks, orders } => {
            c.subcommand = "mgf-exact".into();
            c.ensemble = ens(e, Some(*n));
            c.disks = disks.disks.clone();
            c.options.orders = Some(orders.clone());
        }
        Command::MgfAsymptotic { ens: e, n, disks, quad_tol } => {
            c.subcommand = "mgf-asymptotic".into();
            c.ensemble = ens(e, Some(*n));
            c.disks = disks.disks.clone();
            c.tolerances.insert("quad_abs".into(), *quad_tol);
        }
        Command::Coeffs { ens: e, disks, quad_tol } => {
            c.subcommand = "coeffs".into();
            c.ensemble = ens(e, None);
            c.disks = disks.disks.clone();
            c.tolerances.insert("quad_abs".into(), *quad_tol);
        }
        Command::Cumulants { ens: e, n, disks, orders } => {
            c.subcommand = "cumulants".into();
            c.ensemble = ens(e, Some(*n));
            c.disks = disks.disks.clone();
            c.options.orders = Some(orders.clone());
        }
        Command::Zn { ens: e, n, cap } => {
            c.subcommand = "zn".into();
            c.ensemble = ens(e, Some(*n));
            c.options.cap = Some(*cap);
        }
        Command::Sample {
            ens: e,
            n,
            disks,
            samples,
            seed,
            max_order,
        } => {
            c.subcommand = "sample".into();
            c.ensemble = ens(e, Some(*n));
            c.disks = disks.disks.clone();
            c.seed = Some(*seed);
            c.options.samples = Some(*samples);
            c.options.max_order = Some(*max_order);
        }
        Command::VerifyResidual {
            ens: e,
            disks,
            n_values,
            rate_min,
            rate_max,
        } => {
            c.subcommand = "verify-residual".into();
            c.ensemble = ens(e, None);
            c.disks = disks.disks.clone();
            c.options.n_values = Some(n_values.clone());
            c.tolerances.insert("rate_min".into(), *rate_min);
            c.tolerances.insert("rate_max".into(), *rate_max);
            c.tolerances.insert("noise_rerun_rate".into(), 0.05);
        }
        Command::VerifyClt {
            ens: e,
            n,
            bulk,
            s,
            samples,
            seed,
            tol,
        } => {
            c.subcommand = "verify-clt".into();
            c.ensemble = ens(e, Some(*n));
            c.disks = bulk
                .iter()
                .map(|&r| DiskSpec { r: Some(r), s_frak: None, u: 0.0 })
                .chain(s.map(|s| DiskSpec { r: None, s_frak: Some(s), u: 0.0 }))
                .collect();
            c.seed = Some(*seed);
            c.options.samples = Some(*samples);
            c.tolerances.insert("max_abs_deviation".into(), *tol);
        }
        Command::SpecfunTest { oracle } => {
            c.subcommand = "specfun-test".into();
            c.options.oracle = Some(oracle.display().to_string());
        }
    }
    c.normalized()
}

fn write_output(config: &RunConfig, text: &str) -> std::io::Result<()> {
    match &config.output.path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
    let config = config_from(&cli);
    if cli.dump_config {
        println!("{}", config.canonical());
        return ExitCode::SUCCESS;
    }
    match commands::run(&config) {
        Ok(outcome) => {
            if let Err(e) = write_output(&config, &outcome.text) {
                eprintln!("error: writing output: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            match outcome.pass {
                Some(false) => {
                    eprintln!("verification failed");
                    ExitCode::from(EXIT_VERIFY)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
