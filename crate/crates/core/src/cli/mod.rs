//! Command-line front end. Every subcommand produces a [`Report`] emitted as
//! CSV or JSON.

mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::asymptotics::{
    berry_esseen_sup, ldp_empirical, mdp_empirical, moment_diff, sup_distance_mu_nu,
    DeviationReport, ModerateScale, Tail,
};
use crate::distribution::{build_distribution, log_normalizing_constant, Params};
use crate::error::Error;
use crate::transforms::{
    cf_direct, cf_explicit, log_mgf_direct, log_mgf_explicit, log_normalizing_constant_gbt,
    theta_alpha, ConditioningWarning, QuadratureConfig,
};

pub use report::{format_g12, Meta, Report, Row};
use report::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pmf,
    VerifyGbt,
    MgfCheck,
    CfCheck,
    Ldp,
    Mdp,
    BerryEsseen,
    CompareNu,
    Moments,
}

impl Command {
    /// CSV column order.
    pub fn columns(self, with_samples: bool) -> &'static [&'static str] {
        match self {
            Command::Pmf if with_samples => &["j", "pmf", "log_pmf", "sample_freq"],
            Command::Pmf => &["j", "pmf", "log_pmf"],
            Command::VerifyGbt => &["alpha", "x", "n", "direct_log_z", "gbt_log_z", "rel_err"],
            Command::MgfCheck => &["xi", "direct", "explicit", "rel_err"],
            Command::CfCheck => {
                &["xi", "direct_re", "direct_im", "explicit_re", "explicit_im", "abs_err"]
            }
            Command::Ldp | Command::Mdp => &["n", "empirical", "theoretical", "abs_error"],
            Command::BerryEsseen => &["n", "sup", "sup_sqrt_n"],
            Command::CompareNu => &["n", "sup_distance", "sup_sqrt_n"],
            Command::Moments => &["n", "m", "moment_diff", "scaled_diff"],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// The resolved inputs of one run, defaults filled in. Serialized verbatim
/// into JSON reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub subcommand: Command,
    pub alpha: f64,
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    pub output: OutputFormat,
}

#[derive(Debug, Parser)]
#[command(name = "fracbin", version, about = "Fractional binomial distribution toolkit", allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub n: Option<u32>,
    /// Comma-separated, strictly increasing list of n.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<u32>>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Comma-separated transform arguments.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated moment orders.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid loops (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Relative tolerance of the adaptive quadrature; also caps the absolute floor.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw this many samples (pmf only) and report empirical frequencies.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write `runtime_ms = 0` so that repeated runs are byte-identical.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug)]
pub enum CliError {
    Validation { flag: &'static str, message: String },
    Numerical(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation { flag, message } => write!(f, "invalid {flag}: {message}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn invalid(flag: &'static str, message: impl Into<String>) -> CliError {
    CliError::Validation { flag, message: message.into() }
}

// Library errors reaching this point were not caught by flag validation.
fn lib_err(flag: &'static str) -> impl Fn(Error) -> CliError {
    move |e| if e.is_numerical() { CliError::Numerical(e) } else { invalid(flag, e.to_string()) }
}

fn doubling(from: u32, to: u32) -> Vec<u32> {
    std::iter::successors(Some(from), |&n| Some(n * 2)).take_while(|&n| n <= to).collect()
}

impl ExperimentConfig {
    /// Checks the flags the subcommand needs and fills in defaults.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let cmd = cli.command;
        if !(cli.alpha > 0.0 && cli.alpha.is_finite()) {
            return Err(invalid("--alpha", format!("must be positive and finite, got {}", cli.alpha)));
        }
        let open_x = !matches!(cmd, Command::Pmf);
        if open_x && !(cli.x > 0.0 && cli.x < 1.0) {
            return Err(invalid("--x", format!("must lie in (0, 1), got {}", cli.x)));
        }
        if !(0.0..=1.0).contains(&cli.x) {
            return Err(invalid("--x", format!("must lie in [0, 1], got {}", cli.x)));
        }
        let single_n = matches!(cmd, Command::Pmf | Command::VerifyGbt | Command::MgfCheck | Command::CfCheck);
        let n = if single_n {
            match cli.n {
                Some(0) => return Err(invalid("--n", "must be at least 1")),
                Some(n) => Some(n),
                None => return Err(invalid("--n", "required for this subcommand")),
            }
        } else {
            if cli.n.is_some() {
                return Err(invalid("--n", "not used by this subcommand; use --grid"));
            }
            None
        };
        let grid = if single_n {
            if cli.grid.is_some() {
                return Err(invalid("--grid", "not used by this subcommand; use --n"));
            }
            None
        } else {
            let g = cli.grid.clone().unwrap_or_else(|| match cmd {
                Command::Ldp => doubling(100, 1600),
                Command::Mdp => doubling(400, 6400),
                Command::Moments => doubling(50, 400),
                _ => doubling(50, 6400),
            });
            if g.is_empty() || g[0] == 0 {
                return Err(invalid("--grid", "values must be at least 1"));
            }
            if g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("--grid", "must be strictly increasing"));
            }
            Some(g)
        };

        let z = match (cmd, cli.z) {
            (Command::Ldp, None) => return Err(invalid("--z", "required for ldp")),
            (Command::Ldp, Some(z)) if !(z > 0.0 && z < 1.0) || z == cli.x => {
                return Err(invalid("--z", format!("must lie in (0, 1) and differ from x, got {z}")))
            }
            (Command::Ldp, z) => z,
            (_, Some(_)) => return Err(invalid("--z", "only used by ldp")),
            (_, None) => None,
        };
        let a = match (cmd, cli.a) {
            (Command::Mdp, Some(a)) if a == 0.0 || !a.is_finite() => {
                return Err(invalid("--a", format!("must be finite and nonzero, got {a}")))
            }
            (Command::Mdp, a) => Some(a.unwrap_or(1.0)),
            (_, Some(_)) => return Err(invalid("--a", "only used by mdp")),
            (_, None) => None,
        };
        let beta = match (cmd, cli.beta) {
            (Command::Mdp, Some(b)) if !(b > 0.5 && b < 1.0) => {
                return Err(invalid("--beta", format!("must lie in (0.5, 1), got {b}")))
            }
            (Command::Mdp, b) => Some(b.unwrap_or(0.7)),
            (_, Some(_)) => return Err(invalid("--beta", "only used by mdp")),
            (_, None) => None,
        };
        let xi = match (cmd, &cli.xi) {
            (Command::MgfCheck | Command::CfCheck, Some(v)) => {
                if v.is_empty() || v.iter().any(|t| !t.is_finite()) {
                    return Err(invalid("--xi", "must be a nonempty list of finite values"));
                }
                if cmd == Command::CfCheck {
                    let theta = theta_alpha(cli.alpha);
                    if let Some(t) = v.iter().find(|t| t.abs() >= theta) {
                        return Err(invalid("--xi", format!("|xi| = {} must be below {theta}", t.abs())));
                    }
                }
                Some(v.clone())
            }
            (Command::MgfCheck, None) => Some(vec![-2.0, -0.5, 0.0, 0.5, 2.0]),
            (Command::CfCheck, None) => {
                let t = theta_alpha(cli.alpha);
                Some(vec![-0.9 * t, -0.5 * t, 0.0, 0.5 * t, 0.9 * t])
            }
            (_, Some(_)) => return Err(invalid("--xi", "only used by mgf-check and cf-check")),
            (_, None) => None,
        };
        let m = match (cmd, &cli.m) {
            (Command::Moments, Some(v)) if v.is_empty() || v.contains(&0) => {
                return Err(invalid("--m", "moment orders must be at least 1"))
            }
            (Command::Moments, v) => Some(v.clone().unwrap_or_else(|| vec![1, 2, 3, 4])),
            (_, Some(_)) => return Err(invalid("--m", "only used by moments")),
            (_, None) => None,
        };
        let (seed, samples) = match (cmd, cli.samples) {
            (Command::Pmf, Some(0)) => return Err(invalid("--samples", "must be at least 1")),
            (Command::Pmf, Some(k)) => (Some(cli.seed.unwrap_or(0)), Some(k)),
            (_, Some(_)) => return Err(invalid("--samples", "only used by pmf")),
            (_, None) if cli.seed.is_some() => {
                return Err(invalid("--seed", "only meaningful together with --samples"))
            }
            (_, None) => (None, None),
        };
        let uses_quadrature = matches!(cmd, Command::VerifyGbt | Command::MgfCheck | Command::CfCheck);
        let quadrature = match cli.tol {
            Some(t) if !(t > 0.0 && t < 1.0) => {
                return Err(invalid("--tol", format!("must lie in (0, 1), got {t}")))
            }
            Some(_) if !uses_quadrature => {
                return Err(invalid("--tol", "only used by verify-gbt, mgf-check and cf-check"))
            }
            Some(t) => {
                let d = QuadratureConfig::default();
                Some(QuadratureConfig { rel_tol: t, abs_tol: d.abs_tol.min(t), ..d })
            }
            None if uses_quadrature => Some(QuadratureConfig::default()),
            None => None,
        };
        Ok(ExperimentConfig {
            subcommand: cmd,
            alpha: cli.alpha,
            x: cli.x,
            n,
            grid,
            z,
            a,
            xi,
            beta,
            m,
            seed,
            samples,
            quadrature,
            output: cli.output,
        })
    }

    fn params(&self, n: u32) -> Result<Params, CliError> {
        Params::new(self.alpha, self.x, n).map_err(lib_err("--n"))
    }
}

fn deviation_rows(report: DeviationReport) -> Vec<Row> {
    report
        .rows
        .into_iter()
        .map(|r| {
            row([
                ("n", Value::from(r.n)),
                ("empirical", num(r.empirical)),
                ("theoretical", num(r.theoretical)),
                ("abs_error", num(r.abs_error)),
            ])
        })
        .collect()
}

fn row<const K: usize>(cells: [(&str, Value); K]) -> Row {
    cells.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn note(warnings: &mut Vec<String>, w: Option<ConditioningWarning>) {
    if let Some(w) = w {
        let s = w.to_string();
        if !warnings.contains(&s) {
            warnings.push(s);
        }
    }
}

/// Runs one experiment. Grid loops run on the current rayon pool and are
/// collected in grid order, so the output does not depend on thread count.
pub fn run(config: &ExperimentConfig) -> Result<(Vec<Row>, Vec<String>), CliError> {
    let mut warnings = Vec::new();
    let grid = config.grid.as_deref().unwrap_or(&[]);
    let quad = config.quadrature.unwrap_or_default();
    let rows = match config.subcommand {
        Command::Pmf => {
            let table = build_distribution(config.params(config.n.unwrap_or(0))?)
                .map_err(lib_err("--x"))?;
            let freq = config.samples.map(|k| {
                let mut counts = vec![0u64; table.n() + 1];
                for j in table.sample(config.seed.unwrap_or(0), k) {
                    counts[j as usize] += 1;
                }
                counts.into_iter().map(|c| c as f64 / k as f64).collect::<Vec<_>>()
            });
            table
                .log_pmf_values()
                .iter()
                .enumerate()
                .map(|(j, &lp)| {
                    let mut r = row([("j", Value::from(j)), ("pmf", num(lp.exp())), ("log_pmf", num(lp))]);
                    if let Some(f) = &freq {
                        r.insert("sample_freq".into(), num(f[j]));
                    }
                    r
                })
                .collect()
        }
        Command::VerifyGbt => {
            let p = config.params(config.n.unwrap_or(0))?;
            let direct = log_normalizing_constant(&p).map_err(lib_err("--alpha"))?;
            let gbt = log_normalizing_constant_gbt(&p, &quad).map_err(lib_err("--alpha"))?;
            note(&mut warnings, gbt.warning);
            let rel = (gbt.value - direct).exp_m1().abs();
            vec![row([
                ("alpha", num(p.alpha)),
                ("x", num(p.x)),
                ("n", Value::from(p.n)),
                ("direct_log_z", num(direct)),
                ("gbt_log_z", num(gbt.value)),
                ("rel_err", num(rel)),
            ])]
        }
        Command::MgfCheck => {
            let p = config.params(config.n.unwrap_or(0))?;
            let table = build_distribution(p).map_err(lib_err("--alpha"))?;
            let mut rows = Vec::new();
            for &xi in config.xi.as_deref().unwrap_or(&[]) {
                let d = log_mgf_direct(&table, xi);
                let e = log_mgf_explicit(&p, xi, &quad).map_err(lib_err("--xi"))?;
                note(&mut warnings, e.warning);
                rows.push(row([
                    ("xi", num(xi)),
                    ("direct", num(d.exp())),
                    ("explicit", num(e.value.exp())),
                    ("rel_err", num((e.value - d).exp_m1().abs())),
                ]));
            }
            rows
        }
        Command::CfCheck => {
            let p = config.params(config.n.unwrap_or(0))?;
            let table = build_distribution(p).map_err(lib_err("--alpha"))?;
            let mut rows = Vec::new();
            for &xi in config.xi.as_deref().unwrap_or(&[]) {
                let d = cf_direct(&table, xi);
                let e = cf_explicit(&p, xi, &quad).map_err(lib_err("--xi"))?;
                note(&mut warnings, e.warning);
                rows.push(row([
                    ("xi", num(xi)),
                    ("direct_re", num(d.re)),
                    ("direct_im", num(d.im)),
                    ("explicit_re", num(e.value.re)),
                    ("explicit_im", num(e.value.im)),
                    ("abs_err", num((d - e.value).norm())),
                ]));
            }
            rows
        }
        Command::Ldp => {
            let z = config.z.unwrap_or(f64::NAN);
            let tail = if z > config.x { Tail::Upper } else { Tail::Lower };
            deviation_rows(ldp_empirical(config.alpha, config.x, z, grid, tail).map_err(lib_err("--z"))?)
        }
        Command::Mdp => {
            let scale = ModerateScale::new(config.beta.unwrap_or(0.7), grid.to_vec())
                .map_err(lib_err("--beta"))?;
            let a = config.a.unwrap_or(1.0);
            deviation_rows(mdp_empirical(config.alpha, config.x, a, &scale).map_err(lib_err("--a"))?)
        }
        Command::BerryEsseen => grid
            .par_iter()
            .map(|&n| {
                let table = build_distribution(config.params(n)?).map_err(lib_err("--grid"))?;
                let sup = berry_esseen_sup(&table).map_err(lib_err("--grid"))?;
                Ok(row([
                    ("n", Value::from(n)),
                    ("sup", num(sup)),
                    ("sup_sqrt_n", num(sup * (n as f64).sqrt())),
                ]))
            })
            .collect::<Result<_, CliError>>()?,
        Command::CompareNu => grid
            .par_iter()
            .map(|&n| {
                let d = sup_distance_mu_nu(&config.params(n)?).map_err(lib_err("--grid"))?;
                Ok(row([
                    ("n", Value::from(n)),
                    ("sup_distance", num(d)),
                    ("sup_sqrt_n", num(d * (n as f64).sqrt())),
                ]))
            })
            .collect::<Result<_, CliError>>()?,
        Command::Moments => {
            let orders = config.m.as_deref().unwrap_or(&[]);
            let pairs: Vec<(u32, u32)> =
                grid.iter().flat_map(|&n| orders.iter().map(move |&m| (n, m))).collect();
            pairs
                .par_iter()
                .map(|&(n, m)| {
                    let d = moment_diff(&config.params(n)?, m).map_err(lib_err("--m"))?;
                    Ok(row([
                        ("n", Value::from(n)),
                        ("m", Value::from(m)),
                        ("moment_diff", num(d)),
                        ("scaled_diff", num(d / (n as f64).powi(m as i32 - 1))),
                    ]))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    Ok((rows, warnings))
}

/// Parses `args`, runs the experiment and writes the report. Returns the
/// process exit code.
pub fn execute<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    match execute_parsed(&cli, stdout) {
        Ok(warnings) => {
            for w in warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute_parsed(cli: &Cli, stdout: &mut impl Write) -> Result<Vec<String>, CliError> {
    let config = ExperimentConfig::from_cli(cli)?;
    if cli.threads == Some(0) {
        return Err(invalid("--threads", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| invalid("--threads", e.to_string()))?;
    let start = Instant::now();
    let (rows, warnings) = pool.install(|| run(&config))?;
    let runtime_ms = if cli.reproducible { 0 } else { start.elapsed().as_millis() as u64 };
    let report = Report {
        meta: Meta { version: env!("CARGO_PKG_VERSION").to_string(), runtime_ms, warnings: warnings.clone() },
        rows,
        config,
    };
    let json = report.config.output == OutputFormat::Json;
    match &cli.out {
        Some(path) => {
            let file = File::create(path).map_err(CliError::Io)?;
            let mut w = BufWriter::new(file);
            report.write_to(json, &mut w).map_err(CliError::Io)?;
            w.flush().map_err(CliError::Io)?;
        }
        None => report.write_to(json, stdout).map_err(CliError::Io)?,
    }
    Ok(warnings)
}
