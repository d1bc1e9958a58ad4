//! Experiment runner behind the `wicklab` binary.
//!
//! Every report starts with the library version and the fully resolved
//! configuration, so a CSV or JSON file on its own says how it was made.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{abs_integrand, abs_mse, c2, ito_c2, ito_exp, mse, sko_exp, xq_mse, xq_variable, xt_process, ErrorReport};
use crate::error::{Error, Result};
use crate::gauss_kernel::{NodeSet, TimePoint};
use crate::skorohod::{CoeffFn, IntegrandSpec, QuadratureConfig};
use crate::verification::{determinism_suite, hypergeom_suite, moment_suite, oracle_suite, projection_suite, SuiteResult};
use crate::weyl::{fit_rate, rational_indices, weyl_sequence, RateFit};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when a time cannot be placed relative to the grid.
pub const EXIT_AMBIGUOUS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wicklab", version, about = "Optimal approximation errors of Skorohod integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// e_n^2 along a sequence of grid sizes.
    Mse(ExperimentArgs),
    /// Asymptotic constants c1, c2 (and the adapted constant when it applies).
    Constants(ExperimentArgs),
    /// Least-squares rate fit of e_n along a sequence.
    Rate(ExperimentArgs),
    /// Grid sizes from the sequence alone.
    Weyl(ExperimentArgs),
    /// Oracle, closed-form and Monte Carlo check suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Abs,
    Xt,
    Xq,
    ItoExp,
    SkoExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqKind {
    Weyl,
    Rational,
    List,
    Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Integrand JSON file.
    #[arg(long, conflicts_with = "family")]
    pub integrand: Option<PathBuf>,
    /// Built-in integrand family.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Fixed time of the family, or the horizon of ito-exp ("p/q", a named constant, or a decimal).
    #[arg(long = "t")]
    pub t: Option<String>,
    /// Base time T of the xt and xq families.
    #[arg(long = "T")]
    pub big_t: Option<String>,
    /// Exponent q of the xq family.
    #[arg(long = "q", allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value = "weyl")]
    pub seq: SeqKind,
    /// Time the sequence is built for; defaults to the family's time.
    #[arg(long)]
    pub seq_t: Option<String>,
    /// Explicit grid sizes for --seq list, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub indices: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub nmax: u64,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Chaos truncation; defaults per family.
    #[arg(long = "M")]
    pub m: Option<u32>,
    /// Coarse Gauss-Legendre order.
    #[arg(long, default_value_t = 8)]
    pub quad: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exponent a of the scaled column n^a e^2; defaults per family.
    #[arg(long, allow_hyphen_values = true)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub level: Level,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the integrand comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IntegrandSource {
    File {
        path: PathBuf,
    },
    Family {
        name: Family,
        t: String,
        big_t: String,
        q: f64,
    },
    /// Only the weyl command runs without an integrand.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sequence {
    Weyl { t: String, count: usize, n_max: u64 },
    Rational { t: String, count: usize },
    List { indices: Vec<u64> },
    Dyadic { count: usize, n_max: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub integrand: IntegrandSource,
    /// Absent for the constants command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Sequence>,
    pub truncation: u32,
    pub quadrature: QuadratureConfig,
    /// Exponent of n in the scaled column.
    pub scale: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

const DEFAULT_TIME: &str = "inv_pi";

impl ExperimentConfig {
    pub fn resolve(args: &ExperimentArgs) -> Result<Self> {
        Self::resolve_with(args, true)
    }

    /// Like `resolve`, but skips the grid sequence when it is not needed.
    pub fn resolve_with(args: &ExperimentArgs, needs_sequence: bool) -> Result<Self> {
        let integrand = match (&args.integrand, args.family) {
            (Some(path), None) => IntegrandSource::File { path: path.clone() },
            (None, Some(name)) => IntegrandSource::Family {
                name,
                t: args.t.clone().unwrap_or_else(|| DEFAULT_TIME.into()),
                big_t: args.big_t.clone().unwrap_or_else(|| DEFAULT_TIME.into()),
                q: args.q.unwrap_or(0.0),
            },
            (None, None) => IntegrandSource::None,
            _ => return Err(Error::Config("give exactly one of --integrand and --family".into())),
        };
        let family = match &integrand {
            IntegrandSource::Family { name, .. } => Some(*name),
            IntegrandSource::File { .. } | IntegrandSource::None => None,
        };
        let seq_t = || -> Result<String> {
            if let Some(t) = &args.seq_t {
                return Ok(t.clone());
            }
            match &integrand {
                IntegrandSource::Family { name: Family::Xt | Family::Xq, big_t, .. } => Ok(big_t.clone()),
                IntegrandSource::Family { t, .. } => Ok(t.clone()),
                IntegrandSource::File { .. } => Err(Error::Config("--seq weyl and --seq rational need --seq-t for integrand files".into())),
                IntegrandSource::None => args.t.clone().ok_or_else(|| Error::Config("give --t or --seq-t".into())),
            }
        };
        let sequence = if !needs_sequence {
            None
        } else {
            Some(match args.seq {
                SeqKind::Weyl => Sequence::Weyl { t: seq_t()?, count: args.count, n_max: args.nmax },
                SeqKind::Rational => Sequence::Rational { t: seq_t()?, count: args.count },
                SeqKind::List => {
                    if args.indices.is_empty() || args.indices.contains(&0) {
                        return Err(Error::Config("--seq list needs positive --indices".into()));
                    }
                    Sequence::List { indices: args.indices.clone() }
                }
                SeqKind::Dyadic => Sequence::Dyadic { count: args.count, n_max: args.nmax },
            })
        };
        if !args.indices.is_empty() && args.seq != SeqKind::List {
            return Err(Error::Config("--indices only applies to --seq list".into()));
        }
        let truncation = args.m.unwrap_or(match family {
            Some(Family::Abs) => 50,
            Some(Family::Xt) => 3,
            Some(Family::Xq) => 8,
            Some(Family::ItoExp | Family::SkoExp) => 18,
            None => 0,
        });
        let scale = args.scale.unwrap_or(if family == Some(Family::Abs) { 0.5 } else { 1.0 });
        if args.quad < 2 {
            return Err(Error::Config("--quad must be at least 2".into()));
        }
        let quadrature = QuadratureConfig { order: args.quad, ..QuadratureConfig::default() };
        Ok(Self { integrand, sequence, truncation, quadrature, scale, seed: args.seed, out: args.out.clone(), format: args.format })
    }

    pub fn integrand(&self) -> Result<IntegrandSpec> {
        match &self.integrand {
            IntegrandSource::File { path } => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                IntegrandSpec::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            }
            IntegrandSource::Family { name, t, big_t, q } => {
                let m = self.truncation;
                match name {
                    Family::Abs => abs_integrand(parse_time(t)?, m, &CoeffFn::constant(1.0)),
                    Family::Xt => xt_process(parse_time(big_t)?, m),
                    Family::Xq => xq_variable(parse_time(big_t)?, *q, m),
                    Family::ItoExp => ito_exp(parse_time(t)?, m),
                    Family::SkoExp => sko_exp(parse_time(t)?, m),
                }
            }
            IntegrandSource::None => Err(Error::Config("give one of --integrand and --family".into())),
        }
    }

    pub fn indices(&self) -> Result<Vec<u64>> {
        let Some(sequence) = &self.sequence else {
            return Err(Error::Config("no grid sequence configured".into()));
        };
        match sequence {
            Sequence::Weyl { t, count, n_max } => Ok(weyl_sequence(parse_time(t)?, *count, *n_max)?.indices),
            Sequence::Rational { t, count } => rational_indices(parse_time(t)?, *count),
            Sequence::List { indices } => Ok(indices.clone()),
            Sequence::Dyadic { count, n_max } => Ok((1..=*count as u32).map(|k| 1u64 << k).filter(|n| n <= n_max).collect()),
        }
    }
}

fn parse_time(s: &str) -> Result<TimePoint> {
    TimePoint::parse(s).map_err(|e| Error::Config(format!("time {s:?}: {e}")))
}

/// One line of an error curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub n: u64,
    pub e2: f64,
    pub e: f64,
    pub truncation_bound: f64,
    pub scaled: f64,
}

/// e_n^2 for every index, in index order. The |W_t| and X_q families use
/// their chaos-by-chaos closed forms.
pub fn error_curve(config: &ExperimentConfig) -> Result<Vec<(u64, ErrorReport)>> {
    enum Method {
        Abs(TimePoint),
        Xq(TimePoint, f64),
        Generic(IntegrandSpec),
    }
    let indices = config.indices()?;
    let method = match &config.integrand {
        IntegrandSource::Family { name: Family::Abs, t, .. } => Method::Abs(parse_time(t)?),
        IntegrandSource::Family { name: Family::Xq, big_t, q, .. } => Method::Xq(parse_time(big_t)?, *q),
        _ => Method::Generic(config.integrand()?),
    };
    indices
        .par_iter()
        .map(|&n| {
            let grid = NodeSet::equidistant(n)?;
            let report = match &method {
                Method::Abs(t) => abs_mse(*t, &grid, config.truncation)?,
                Method::Xq(t, q) => xq_mse(*t, *q, &grid, config.truncation)?,
                Method::Generic(u) => mse(u, &grid, &config.quadrature)?,
            };
            Ok((n, report))
        })
        .collect()
}

fn curve_rows(config: &ExperimentConfig, curve: &[(u64, ErrorReport)]) -> Vec<CurveRow> {
    curve
        .iter()
        .map(|(n, r)| CurveRow { n: *n, e2: r.e2, e: r.e, truncation_bound: r.truncation_bound, scaled: (*n as f64).powf(config.scale) * r.e2 })
        .collect()
}

#[derive(Serialize)]
struct Header<'a, C: Serialize> {
    version: &'a str,
    command: &'a str,
    config: &'a C,
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn csv_header<C: Serialize>(w: &mut dyn Write, command: &str, config: &C) -> Result<()> {
    writeln!(w, "# wicklab {VERSION} {command}")?;
    writeln!(w, "# config {}", serde_json::to_string(config)?)?;
    Ok(())
}

fn write_csv_rows<T: Serialize>(w: &mut dyn Write, rows: &[T]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn cmd_mse(config: &ExperimentConfig) -> Result<()> {
    let curve = error_curve(config)?;
    let mut w = writer(&config.out)?;
    match config.format {
        Format::Csv => {
            csv_header(&mut *w, "mse", config)?;
            write_csv_rows(&mut *w, &curve_rows(config, &curve))
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                header: Header<'a, ExperimentConfig>,
                reports: Vec<serde_json::Value>,
            }
            let reports = curve
                .iter()
                .map(|(n, r)| {
                    let mut v = serde_json::to_value(r)?;
                    v["n"] = (*n).into();
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            write_json(&mut *w, &Out { header: Header { version: VERSION, command: "mse", config }, reports })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub c1: f64,
    pub c2: f64,
    pub per_tau: Vec<(usize, f64)>,
    /// Adapted integrands only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ito_c2: Option<f64>,
}

pub fn constants(config: &ExperimentConfig) -> Result<ConstantsReport> {
    let u = config.integrand()?;
    let c = c2(&u, &config.quadrature)?;
    let ito = if u.is_adapted() { Some(ito_c2(&u, &config.quadrature)?) } else { None };
    Ok(ConstantsReport { c1: c.c1, c2: c.c2, per_tau: c.per_tau, ito_c2: ito })
}

pub fn cmd_constants(config: &ExperimentConfig) -> Result<()> {
    let report = constants(config)?;
    let mut w = writer(&config.out)?;
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        header: Header<'a, ExperimentConfig>,
        constants: ConstantsReport,
    }
    write_json(&mut *w, &Out { header: Header { version: VERSION, command: "constants", config }, constants: report })
}

pub fn cmd_rate(config: &ExperimentConfig) -> Result<()> {
    let curve = error_curve(config)?;
    let fit: RateFit = fit_rate(&curve.iter().map(|(n, r)| (*n, r.e)).collect::<Vec<_>>())?;
    let rows = curve_rows(config, &curve);
    let mut w = writer(&config.out)?;
    match config.format {
        Format::Csv => {
            csv_header(&mut *w, "rate", config)?;
            writeln!(w, "# fit {}", serde_json::to_string(&fit)?)?;
            write_csv_rows(&mut *w, &rows)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                header: Header<'a, ExperimentConfig>,
                fit: RateFit,
                curve: Vec<CurveRow>,
            }
            write_json(&mut *w, &Out { header: Header { version: VERSION, command: "rate", config }, fit, curve: rows })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylRow {
    pub n: u64,
    /// {n t}
    pub frac: f64,
    /// |{n t} - 1/2|
    pub gap: f64,
    /// 4 n var(B_t)
    pub bridge_ratio: f64,
}

pub fn cmd_weyl(config: &ExperimentConfig) -> Result<()> {
    let (t, indices) = match &config.sequence {
        Some(Sequence::Weyl { t, .. } | Sequence::Rational { t, .. }) => (parse_time(t)?, config.indices()?),
        _ => return Err(Error::Config("weyl needs --seq weyl or --seq rational".into())),
    };
    let rows: Vec<WeylRow> = indices
        .iter()
        .map(|&n| {
            let f = t.fractional(n)?;
            let frac = f.frac;
            Ok(WeylRow { n, frac, gap: (frac - 0.5).abs(), bridge_ratio: 4.0 * frac * (1.0 - frac) })
        })
        .collect::<Result<_>>()?;
    let mut w = writer(&config.out)?;
    match config.format {
        Format::Csv => {
            csv_header(&mut *w, "weyl", config)?;
            write_csv_rows(&mut *w, &rows)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                header: Header<'a, ExperimentConfig>,
                rows: Vec<WeylRow>,
            }
            write_json(&mut *w, &Out { header: Header { version: VERSION, command: "weyl", config }, rows })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

pub fn verify(level: Level, seed: u64) -> Result<VerifyReport> {
    let (pairs, k_max, monomials, samples) = match level {
        Level::Quick => (100, 6, 10, 100_000),
        Level::Full => (500, 10, 50, 1_000_000),
    };
    let suites = vec![
        oracle_suite(pairs, 6, seed)?,
        hypergeom_suite(k_max)?,
        moment_suite(monomials, samples, seed)?,
        projection_suite(samples, seed)?,
        determinism_suite(samples / 10, seed)?,
    ];
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport { suites, passed })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let report = verify(args.level, args.seed)?;
    #[derive(Serialize)]
    struct Config {
        level: Level,
        seed: u64,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        header: Header<'a, Config>,
        #[serde(flatten)]
        report: &'a VerifyReport,
    }
    let config = Config { level: args.level, seed: args.seed };
    let mut w = writer(&args.out)?;
    write_json(&mut *w, &Out { header: Header { version: VERSION, command: "verify", config: &config }, report: &report })?;
    Ok(report.passed)
}

/// Thread pool size from WICKLAB_THREADS, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("WICKLAB_THREADS") {
        Ok(v) => {
            v.trim().parse::<usize>().ok().filter(|&n| n > 0).map(Some).ok_or_else(|| Error::Config(format!("WICKLAB_THREADS={v:?} is not a positive integer")))
        }
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Mse(a) => cmd_mse(&ExperimentConfig::resolve(a)?).map(|_| 0),
        Command::Constants(a) => cmd_constants(&ExperimentConfig::resolve_with(a, false)?).map(|_| 0),
        Command::Rate(a) => cmd_rate(&ExperimentConfig::resolve(a)?).map(|_| 0),
        Command::Weyl(a) => cmd_weyl(&ExperimentConfig::resolve(a)?).map(|_| 0),
        Command::Verify(a) => cmd_verify(a).map(|ok| if ok { 0 } else { 1 }),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = threads_from_env().and_then(|threads| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| dispatch(&cli))
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BoundaryAmbiguity { t, n } => {
            eprintln!("ambiguous (n, t) = ({n}, {t})");
            EXIT_AMBIGUOUS
        }
        Error::Config(_) | Error::InvalidSpec(_) | Error::Json(_) | Error::TimeOutOfRange(_) | Error::NoExactTag | Error::InsufficientRange { .. } => {
            EXIT_CONFIG
        }
        _ => 1,
    }
}
