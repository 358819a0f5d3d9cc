//! Command-line front end: `purity`, `phase-shift`, `duration`, `geodesic`,
//! `complexity`, `sweep` and `verify`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::complexity::{complexity_ratio, ComplexityReport};
use crate::error::{Error, Result};
use crate::geodesics::{self, head_on_initial_state, integrate_geodesic, GeodesicState};
use crate::oracle::{consistency_checks, run_all, MetricSource, OracleReport};
use crate::scattering::{self as sc, ScatteringConfig};

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "entangle-geom",
    version,
    about = "Scattering entanglement and information-geometric complexity"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// JSON scattering configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Values that replace the corresponding config-file entries.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long = "V", global = true)]
    pub potential: Option<f64>,
    #[arg(long, global = true)]
    pub k0: Option<f64>,
    #[arg(long, global = true)]
    pub sigma0: Option<f64>,
    #[arg(long = "R0", global = true)]
    pub r0: Option<f64>,
    #[arg(long, global = true)]
    pub d: Option<f64>,
    #[arg(long, global = true)]
    pub mu_reduced: Option<f64>,
    #[arg(long = "a-s", global = true)]
    pub a_s: Option<f64>,
    /// Correlation; sets `V = r k0^2 / (2 mu)`. For `geodesic`, the manifold correlation.
    #[arg(long, global = true)]
    pub r: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Purity from the exact and low-energy phase shifts.
    Purity,
    /// Exact, low-energy and potential-form phase shifts.
    PhaseShift,
    /// Closed-form and geodesic entanglement durations.
    Duration {
        /// Momentum band half-width, relative to k0.
        #[arg(long, default_value_t = geodesics::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Integrate a geodesic and dump the path.
    Geodesic(GeodesicArgs),
    /// Complexity ratio of the matched head-on runs.
    Complexity,
    /// Evaluate a quantity over a range of one parameter.
    Sweep(SweepArgs),
    /// Run the oracle suite and cross-module consistency checks.
    Verify {
        #[arg(long, hide = true)]
        perturb_metric: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    /// Initial point `mu_k1,mu_k2,sigma`.
    #[arg(long, value_delimiter = ',', required_unless_present = "head_on")]
    pub theta: Vec<f64>,
    /// Initial velocity.
    #[arg(long, value_delimiter = ',', required_unless_present = "head_on")]
    pub velocity: Vec<f64>,
    /// Start from the head-on state built from the config's `sigma0` and `k0`.
    #[arg(long, conflicts_with_all = ["theta", "velocity"])]
    pub head_on: bool,
    #[arg(long, default_value_t = 10.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "V")]
    V,
    #[value(name = "k0")]
    K0,
    #[value(name = "sigma0")]
    Sigma0,
    #[value(name = "R0")]
    R0,
    #[value(name = "d")]
    D,
    #[value(name = "r")]
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Purity,
    PhaseShift,
    Duration,
    Complexity,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// Logarithmic spacing.
    #[arg(long)]
    pub log: bool,
    #[arg(long, value_enum, default_value_t = Quantity::Purity)]
    pub quantity: Quantity,
    #[arg(long, default_value_t = geodesics::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

/// Sweep grid definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite()) || self.from >= self.to {
            return Err(Error::Config(format!(
                "sweep needs finite from < to, got {} .. {}",
                self.from, self.to
            )));
        }
        if self.steps < 2 {
            return Err(Error::Config("sweep needs at least 2 steps".into()));
        }
        if self.log && self.from <= 0.0 {
            return Err(Error::Config("logarithmic sweep needs from > 0".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.steps - 1;
        Ok((0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                if i == n {
                    self.to
                } else if self.log {
                    (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp()
                } else {
                    self.from + t * (self.to - self.from)
                }
            })
            .collect())
    }
}

fn apply_sweep(base: &ScatteringConfig, param: SweepParam, value: f64) -> ScatteringConfig {
    let mut c = *base;
    match param {
        SweepParam::V => c.potential = value,
        SweepParam::K0 => c.k0 = value,
        SweepParam::Sigma0 => c.sigma0 = value,
        SweepParam::R0 => c.r0 = value,
        SweepParam::D => c.d = value,
        SweepParam::R => c = c.with_r_ig(value),
    }
    c
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    mu_reduced: Option<f64>,
    #[serde(rename = "V")]
    potential: Option<f64>,
    d: Option<f64>,
    k0: Option<f64>,
    sigma0: Option<f64>,
    #[serde(rename = "R0")]
    r0: Option<f64>,
    a_s: Option<f64>,
}

/// Merges the config file (if any) with the overrides and validates.
pub fn resolve_config(path: Option<&Path>, o: &Overrides) -> Result<ScatteringConfig> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<PartialConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => PartialConfig::default(),
    };
    if o.r.is_some() && o.potential.is_some() {
        return Err(Error::Config(
            "--r and --V both set the potential; give one".into(),
        ));
    }
    let need = |name: &str, flag: Option<f64>, from_file: Option<f64>| {
        flag.or(from_file).ok_or_else(|| {
            let long = name.replace('_', "-");
            Error::Config(format!("missing `{name}` (config file or --{long})"))
        })
    };
    let mut cfg = ScatteringConfig {
        mu_reduced: need("mu_reduced", o.mu_reduced, file.mu_reduced)?,
        potential: if o.r.is_some() {
            0.0
        } else {
            need("V", o.potential, file.potential)?
        },
        d: need("d", o.d, file.d)?,
        k0: need("k0", o.k0, file.k0)?,
        sigma0: need("sigma0", o.sigma0, file.sigma0)?,
        r0: need("R0", o.r0, file.r0)?,
        a_s: o.a_s.or(file.a_s),
    };
    if let Some(r) = o.r {
        cfg = cfg.with_r_ig(r);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    // Drops the sign of negative zero.
    let x = x + 0.0;
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV/JSON record with a fixed column order.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| match v {
                            Value::Number(n) => fmt_num(n.as_f64().unwrap_or(f64::NAN)),
                            Value::Null => String::new(),
                            Value::String(t) => t.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                Ok(s)
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map = self
                            .columns
                            .iter()
                            .map(|c| c.to_string())
                            .zip(row.iter().cloned())
                            .collect();
                        Value::Object(map)
                    })
                    .collect();
                let v = if records.len() == 1 {
                    records[0].clone()
                } else {
                    Value::Array(records)
                };
                Ok(serde_json::to_string_pretty(&v)? + "\n")
            }
        }
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

const PURITY_COLUMNS: [&str; 12] = [
    "k0",
    "sigma0",
    "R0",
    "V",
    "d",
    "r_IG",
    "theta_exact",
    "theta_lowE",
    "P_general",
    "P_lowE",
    "low_energy",
    "weak_correlation",
];

fn purity_row(cfg: &ScatteringConfig) -> Result<Vec<Value>> {
    let r = sc::r_ig_from_potential(cfg);
    let theta = sc::phase_shift_exact(cfg)?;
    Ok(vec![
        num(cfg.k0),
        num(cfg.sigma0),
        num(cfg.r0),
        num(cfg.potential),
        num(cfg.d),
        num(r),
        num(theta),
        num(sc::phase_shift_low_energy(r, cfg.d, cfg.k0)),
        num(sc::purity_general(cfg, theta)),
        num(sc::purity_low_energy(cfg)),
        json!(cfg.k0 * cfg.d <= sc::LOW_ENERGY_MAX_KD),
        json!(r.abs() <= sc::WEAK_CORRELATION_MAX_R),
    ])
}

const PHASE_COLUMNS: [&str; 10] = [
    "k0",
    "d",
    "V",
    "r_IG",
    "theta_exact",
    "theta_lowE",
    "theta_potential",
    "rel_err_lowE",
    "S0",
    "regime_ok",
];

fn phase_row(cfg: &ScatteringConfig) -> Result<Vec<Value>> {
    let rep = sc::phase_shift_report(cfg)?;
    let rel = if rep.theta_exact == 0.0 {
        (rep.theta_low_energy - rep.theta_exact).abs()
    } else {
        ((rep.theta_low_energy - rep.theta_exact) / rep.theta_exact).abs()
    };
    Ok(vec![
        num(cfg.k0),
        num(cfg.d),
        num(cfg.potential),
        num(sc::r_ig_from_potential(cfg)),
        num(rep.theta_exact),
        num(rep.theta_low_energy),
        num(rep.theta_potential),
        num(rel),
        num(sc::cross_section(rep.theta_exact, cfg.k0)),
        json!(rep.regime_ok),
    ])
}

const DURATION_COLUMNS: [&str; 7] = [
    "k0",
    "sigma0",
    "r",
    "eta_delta",
    "r_bound",
    "duration",
    "duration_numeric",
];

fn duration_row(cfg: &ScatteringConfig, epsilon: f64) -> Result<Vec<Value>> {
    let r = sc::r_ig_from_potential(cfg);
    Ok(vec![
        num(cfg.k0),
        num(cfg.sigma0),
        num(r),
        num(sc::eta_delta(cfg.k0, cfg.sigma0)?),
        num(sc::r_upper_bound(cfg.k0, cfg.sigma0)?),
        num(sc::entanglement_duration(cfg.k0, cfg.sigma0, r)?),
        num(geodesics::duration_numeric(cfg.k0, cfg.sigma0, r, epsilon)?),
    ])
}

const COMPLEXITY_COLUMNS: [&str; 6] = [
    "r",
    "c_uncorr",
    "c_corr",
    "ratio",
    "predicted_ratio",
    "r_recovered",
];

fn complexity_row(cfg: &ScatteringConfig) -> Result<Vec<Value>> {
    let rep: ComplexityReport = complexity_ratio(cfg)?;
    Ok(vec![
        num(sc::r_ig_from_potential(cfg)),
        num(rep.c_uncorr),
        num(rep.c_corr),
        num(rep.ratio),
        num(rep.predicted_ratio),
        num(rep.r_recovered),
    ])
}

fn single(columns: &[&'static str], row: Vec<Value>) -> Table {
    let mut t = Table::new(columns.to_vec());
    t.rows.push(row);
    t
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn verify(perturb: Option<f64>) -> Vec<OracleReport> {
    let source = match perturb {
        Some(delta) => MetricSource::Perturbed { delta },
        None => MetricSource::Analytic,
    };
    let mut reports = run_all(&[], source);
    reports.extend(consistency_checks());
    reports
}

/// Runs a parsed command. `Ok(false)` means a verification failure.
pub fn run(cli: &Cli) -> Result<bool> {
    let cfg = || resolve_config(cli.config.as_deref(), &cli.overrides);
    let csv_default = cli.format.unwrap_or(Format::Csv);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Purity => {
            let c = cfg()?;
            emit(
                out,
                &single(&PURITY_COLUMNS, purity_row(&c)?).render(csv_default)?,
            )?;
        }
        Command::PhaseShift => {
            let c = cfg()?;
            emit(
                out,
                &single(&PHASE_COLUMNS, phase_row(&c)?).render(csv_default)?,
            )?;
        }
        Command::Duration { epsilon } => {
            let c = cfg()?;
            emit(
                out,
                &single(&DURATION_COLUMNS, duration_row(&c, *epsilon)?).render(csv_default)?,
            )?;
        }
        Command::Complexity => {
            let c = cfg()?;
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&complexity_ratio(&c)?)? + "\n",
                Format::Csv => {
                    single(&COMPLEXITY_COLUMNS, complexity_row(&c)?).render(Format::Csv)?
                }
            };
            emit(out, &text)?;
        }
        Command::Geodesic(args) => {
            let r = cli.overrides.r.unwrap_or(0.0);
            let start = if args.head_on {
                let c = cfg()?;
                head_on_initial_state(c.sigma0, c.k0, r)?
            } else {
                if args.theta.len() != 3 || args.velocity.len() != 3 {
                    return Err(Error::Config(
                        "--theta and --velocity take three comma-separated values".into(),
                    ));
                }
                GeodesicState::new(
                    [args.theta[0], args.theta[1], args.theta[2]],
                    [args.velocity[0], args.velocity[1], args.velocity[2]],
                )
            };
            let path = integrate_geodesic(&start, r, args.tau, args.tol)?;
            let text = match csv_default {
                Format::Csv => {
                    let mut buf = Vec::new();
                    path.write_csv(&mut buf)?;
                    String::from_utf8(buf).expect("CSV is ASCII")
                }
                Format::Json => serde_json::to_string_pretty(&path)? + "\n",
            };
            emit(out, &text)?;
        }
        Command::Sweep(args) => {
            let base = cfg()?;
            let spec = SweepSpec {
                param: args.param,
                from: args.from,
                to: args.to,
                steps: args.steps,
                log: args.log,
            };
            let points: Vec<ScatteringConfig> = spec
                .values()?
                .into_iter()
                .map(|v| apply_sweep(&base, spec.param, v))
                .collect();
            let (columns, rows): (&[&'static str], Vec<Result<Vec<Value>>>) = match args.quantity {
                Quantity::Purity => (&PURITY_COLUMNS, points.par_iter().map(purity_row).collect()),
                Quantity::PhaseShift => {
                    (&PHASE_COLUMNS, points.par_iter().map(phase_row).collect())
                }
                Quantity::Duration => (
                    &DURATION_COLUMNS,
                    points
                        .par_iter()
                        .map(|c| duration_row(c, args.epsilon))
                        .collect(),
                ),
                Quantity::Complexity => (
                    &COMPLEXITY_COLUMNS,
                    points.par_iter().map(complexity_row).collect(),
                ),
            };
            let mut table = Table::new(columns.to_vec());
            table.rows = rows.into_iter().collect::<Result<_>>()?;
            emit(out, &table.render(csv_default)?)?;
        }
        Command::Verify { perturb_metric } => {
            let reports = verify(*perturb_metric);
            let ok = reports.iter().all(|r| r.passed);
            for r in reports.iter().filter(|r| !r.passed) {
                eprintln!("FAILED {}", r.check_name);
            }
            emit(out, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
            return Ok(ok);
        }
    }
    Ok(true)
}

/// Exit status for an error: 2 for bad input, 3 for numerical failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::InvalidParameter { .. }
        | Error::CorrelationOutOfRange { .. }
        | Error::SeriesDivergence { .. } => EXIT_CONFIG,
        Error::BranchBoundary { .. }
        | Error::Integration { .. }
        | Error::NotReached { .. }
        | Error::Quadrature { .. } => EXIT_NUMERICAL,
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
