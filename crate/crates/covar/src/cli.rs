//! Command-line front end: single queries, grid sweeps to CSV, oracle
//! validation, and model estimation from data.
//!
//! Exit codes: 0 success/PASS, 1 runtime or domain error, 2 usage error,
//! 3 validation FAIL.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::copulas::{CopulaModel, Side};
use crate::covar::{covar, delta_covar, Condition, RiskQuery, SystemModel};
use crate::error::{CovarError, Result};
use crate::ingestion::{estimate_model, read_loss_csv, CopulaFamily, MarginKind};
use crate::margins::Margin;
use crate::oracle::{mc_covar, OracleConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAIL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "covar", about = "Copula-based CoVaR / delta-CoVaR engine")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Compute a single CoVaR (and optionally delta-CoVaR) query.
    Compute(ComputeArgs),
    /// Sweep one or two parameter grids and emit CSV.
    Sweep(SweepArgs),
    /// Cross-check the analytic CoVaR against the Monte-Carlo oracle.
    Validate(ValidateArgs),
    /// Estimate a model from a loss CSV via Kendall-tau inversion.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args, Clone)]
struct ModelFlags {
    /// Copula family: gaussian | t | gumbel | clayton
    #[arg(long)]
    copula: String,
    /// Correlation parameter (gaussian, t)
    #[arg(long)]
    rho: Option<f64>,
    /// Dependence parameter (gumbel, clayton)
    #[arg(long)]
    theta: Option<f64>,
    /// Degrees of freedom (t copula)
    #[arg(long)]
    nu: Option<f64>,
    /// Institution margin: normal:MU,SIGMA | t:NU,LOC,SCALE | empirical:PATH
    #[arg(long = "margin-i")]
    margin_i: Option<String>,
    /// System margin, same grammar
    #[arg(long = "margin-s")]
    margin_s: Option<String>,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// System confidence level
    #[arg(long)]
    alpha: f64,
    /// Condition the institution at its beta-quantile
    #[arg(long)]
    beta: Option<f64>,
    /// Condition the institution at a fixed loss value
    #[arg(long)]
    l: Option<f64>,
    /// Condition the institution at its mean loss
    #[arg(long = "at-mean")]
    at_mean: bool,
    /// Also report delta-CoVaR (requires --beta)
    #[arg(long)]
    delta: bool,
    /// Use the "<=" condition instead of "=" (requires --beta)
    #[arg(long)]
    leq: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// Quantity: covar | delta | tilde_alpha | tail_dep_upper |
    /// tail_dep_lower | cond_quantile
    #[arg(long)]
    quantity: String,
    /// Swept dimension, `name=start:step:end` or `name=v1,v2,...`;
    /// repeat once for a second dimension (row-major order)
    #[arg(long)]
    sweep: Vec<String>,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    beta: f64,
    /// Level for the tail-dependence quantities
    #[arg(long)]
    level: Option<f64>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 10_000_000)]
    samples: usize,
    /// RNG seed (falls back to COVAR_SEED, then 42)
    #[arg(long)]
    seed: Option<u64>,
    /// Conditioning band half-width in u-space
    #[arg(long, default_value_t = 0.005)]
    band: f64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// CSV with header date,loss_i,loss_s (date optional)
    #[arg(long)]
    input: PathBuf,
    /// Copula family to fit: gaussian | t | gumbel | clayton
    #[arg(long)]
    family: String,
    /// Margin family: normal | t | empirical
    #[arg(long, default_value = "normal")]
    margins: String,
    /// Degrees of freedom for t copula / t margins
    #[arg(long)]
    nu: Option<f64>,
    /// Chain into a CoVaR computation at this level
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

/// Runs the CLI against the given argument list, writing reports to `out`.
/// Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match cli.cmd {
        Cmd::Compute(a) => cmd_compute(a, out),
        Cmd::Sweep(a) => cmd_sweep(a, out),
        Cmd::Validate(a) => cmd_validate(a, out),
        Cmd::Estimate(a) => cmd_estimate(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            match e {
                CovarError::InsufficientData { .. } => EXIT_RUNTIME,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(CovarError),
}

impl From<CovarError> for CliError {
    fn from(e: CovarError) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult = std::result::Result<i32, CliError>;

fn parse_margin(spec: &str) -> Result<Margin> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CovarError::Parse(format!("bad margin spec {spec:?}")))?;
    let nums = |n: usize| -> Result<Vec<f64>> {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != n {
            return Err(CovarError::Parse(format!(
                "margin spec {spec:?} needs {n} comma-separated parameters"
            )));
        }
        parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| CovarError::Parse(format!("bad number {p:?} in {spec:?}")))
            })
            .collect()
    };
    match kind {
        "normal" => {
            let p = nums(2)?;
            Margin::normal(p[0], p[1])
        }
        "t" => {
            let p = nums(3)?;
            Margin::student_t(p[0], p[1], p[2])
        }
        "empirical" => {
            let text = std::fs::read_to_string(rest)?;
            let samples: Result<Vec<f64>> = text
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| CovarError::Parse(format!("bad sample {tok:?} in {rest}")))
                })
                .collect();
            Margin::empirical(samples?)
        }
        other => Err(CovarError::Parse(format!("unknown margin family {other:?}"))),
    }
}

fn build_copula(flags: &ModelFlags) -> std::result::Result<CopulaModel, CliError> {
    let need = |opt: Option<f64>, name: &str| {
        opt.ok_or_else(|| {
            CliError::Usage(format!("--{name} is required for --copula {}", flags.copula))
        })
    };
    let copula = match flags.copula.as_str() {
        "gaussian" => CopulaModel::gaussian(need(flags.rho, "rho")?)?,
        "t" => CopulaModel::student_t(need(flags.rho, "rho")?, flags.nu.unwrap_or(5.0))?,
        "gumbel" => CopulaModel::gumbel(need(flags.theta, "theta")?)?,
        "clayton" => CopulaModel::clayton(need(flags.theta, "theta")?)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown copula family {other:?} (expected gaussian|t|gumbel|clayton)"
            )))
        }
    };
    Ok(copula)
}

fn build_model(flags: &ModelFlags) -> std::result::Result<SystemModel, CliError> {
    let copula = build_copula(flags)?;
    let margin_s = match &flags.margin_s {
        Some(spec) => parse_margin(spec)?,
        None => return Err(CliError::Usage("--margin-s is required".into())),
    };
    // Quantile-conditioned queries never touch the institution margin, so a
    // standard normal stands in when none is supplied.
    let margin_i = match &flags.margin_i {
        Some(spec) => parse_margin(spec)?,
        None => Margin::normal(0.0, 1.0).expect("valid"),
    };
    Ok(SystemModel {
        margin_i,
        margin_s,
        copula,
    })
}

fn cmd_compute(args: ComputeArgs, out: &mut dyn Write) -> CliResult {
    let model = build_model(&args.model)?;
    let picked = [args.beta.is_some(), args.l.is_some(), args.at_mean]
        .iter()
        .filter(|&&b| b)
        .count();
    if picked != 1 {
        return Err(CliError::Usage(
            "exactly one of --beta, --l, --at-mean must be given".into(),
        ));
    }
    if (args.l.is_some() || args.at_mean) && args.model.margin_i.is_none() {
        return Err(CliError::Usage(
            "--l and --at-mean require --margin-i".into(),
        ));
    }
    let condition = if let Some(beta) = args.beta {
        if args.leq {
            Condition::AtMostQuantile(beta)
        } else {
            Condition::AtQuantile(beta)
        }
    } else if let Some(l) = args.l {
        if args.leq {
            return Err(CliError::Usage("--leq requires --beta".into()));
        }
        Condition::AtValue(l)
    } else {
        Condition::AtMean
    };
    let query = RiskQuery::new(args.alpha, condition)?;
    let mut report = covar(&model, &query)?;
    if args.delta {
        let beta = args
            .beta
            .ok_or_else(|| CliError::Usage("--delta requires --beta".into()))?;
        report.delta_covar = Some(delta_covar(&model, args.alpha, beta)?);
    }
    let payload = json!({
        "covar": report.covar,
        "tilde_alpha": report.tilde_alpha,
        "var_s": report.var_s,
        "delta_covar": report.delta_covar,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&payload).unwrap())
        .map_err(CovarError::Io)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone)]
struct SweepDim {
    name: String,
    values: Vec<f64>,
}

fn parse_sweep(spec: &str) -> std::result::Result<SweepDim, CliError> {
    let (name, rest) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("bad sweep spec {spec:?}")))?;
    let name = name.trim().to_string();
    const DIMS: [&str; 6] = ["alpha", "beta", "rho", "theta", "nu", "level"];
    if !DIMS.contains(&name.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown sweep dimension {name:?} (expected one of {DIMS:?})"
        )));
    }
    let bad = |_| CliError::Usage(format!("bad number in sweep spec {spec:?}"));
    let values = if rest.contains(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!(
                "range sweep must be start:step:end, got {spec:?}"
            )));
        }
        let start: f64 = parts[0].trim().parse().map_err(bad)?;
        let step: f64 = parts[1].trim().parse().map_err(bad)?;
        let end: f64 = parts[2].trim().parse().map_err(bad)?;
        if step <= 0.0 && start <= end || step >= 0.0 && start > end && step != 0.0 {
            return Err(CliError::Usage(format!("empty or divergent range {spec:?}")));
        }
        if step == 0.0 {
            return Err(CliError::Usage("sweep step must be nonzero".into()));
        }
        let mut v = Vec::new();
        let mut k = 0usize;
        loop {
            let x = start + step * k as f64;
            if (step > 0.0 && x > end + 1e-12) || (step < 0.0 && x < end - 1e-12) {
                break;
            }
            v.push(x);
            k += 1;
        }
        v
    } else {
        rest.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(bad))
            .collect::<std::result::Result<Vec<f64>, CliError>>()?
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty sweep grid in {spec:?}")));
    }
    Ok(SweepDim { name, values })
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> CliResult {
    if args.sweep.is_empty() || args.sweep.len() > 2 {
        return Err(CliError::Usage(
            "provide one or two --sweep dimensions".into(),
        ));
    }
    let dims: Vec<SweepDim> = args
        .sweep
        .iter()
        .map(|s| parse_sweep(s))
        .collect::<std::result::Result<_, _>>()?;

    let mut rows = String::new();
    let header: Vec<&str> = dims
        .iter()
        .map(|d| d.name.as_str())
        .chain([args.quantity.as_str()])
        .collect();
    rows.push_str(&header.join(","));
    rows.push('\n');

    let grid: Vec<Vec<f64>> = if dims.len() == 1 {
        dims[0].values.iter().map(|&v| vec![v]).collect()
    } else {
        let mut g = Vec::new();
        for &a in &dims[0].values {
            for &b in &dims[1].values {
                g.push(vec![a, b]);
            }
        }
        g
    };

    for point in &grid {
        let mut flags = args.model.clone();
        let mut alpha = args.alpha;
        let mut beta = args.beta;
        let mut level = args.level;
        for (dim, &value) in dims.iter().zip(point.iter()) {
            match dim.name.as_str() {
                "alpha" => alpha = value,
                "beta" => beta = value,
                "rho" => flags.rho = Some(value),
                "theta" => flags.theta = Some(value),
                "nu" => flags.nu = Some(value),
                "level" => level = Some(value),
                _ => unreachable!(),
            }
        }
        let value = match args.quantity.as_str() {
            "covar" => {
                let model = build_model(&flags)?;
                covar(&model, &RiskQuery::new(alpha, Condition::AtQuantile(beta))?)?.covar
            }
            "delta" => {
                let model = build_model(&flags)?;
                delta_covar(&model, alpha, beta)?
            }
            "tilde_alpha" => {
                let model = build_model(&flags)?;
                covar(&model, &RiskQuery::new(alpha, Condition::AtQuantile(beta))?)?
                    .tilde_alpha
            }
            "tail_dep_upper" | "tail_dep_lower" => {
                let copula = build_copula(&flags)?;
                let level = level.ok_or_else(|| {
                    CliError::Usage("tail-dependence sweeps need --level or a level sweep".into())
                })?;
                let side = if args.quantity == "tail_dep_upper" {
                    Side::Upper
                } else {
                    Side::Lower
                };
                copula.tail_dep_fn(level, side)?
            }
            "cond_quantile" => {
                let copula = build_copula(&flags)?;
                copula.cond_quantile(alpha, beta)?
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown quantity {other:?}"
                )))
            }
        };
        let coords: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
        rows.push_str(&coords.join(","));
        rows.push(',');
        rows.push_str(&format!("{value}\n"));
    }

    match &args.out {
        Some(path) => std::fs::write(path, rows).map_err(CovarError::Io)?,
        None => write!(out, "{rows}").map_err(CovarError::Io)?,
    }
    Ok(EXIT_OK)
}

fn cmd_validate(args: ValidateArgs, out: &mut dyn Write) -> CliResult {
    let model = build_model(&args.model)?;
    let seed = args.seed.unwrap_or_else(|| {
        std::env::var("COVAR_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(42)
    });
    let analytic = covar(
        &model,
        &RiskQuery::new(args.alpha, Condition::AtQuantile(args.beta))?,
    )?
    .covar;
    let cfg = OracleConfig {
        n_samples: args.samples,
        band_halfwidth: args.band,
        seed,
        confidence: 0.99,
    };
    let est = mc_covar(&model, args.alpha, args.beta, &cfg)?;
    let pass = (analytic - est.value).abs() <= est.half_width + 1e-9;
    writeln!(out, "analytic    {analytic:.6}").map_err(CovarError::Io)?;
    writeln!(out, "oracle      {:.6}", est.value).map_err(CovarError::Io)?;
    writeln!(out, "half_width  {:.6}", est.half_width).map_err(CovarError::Io)?;
    writeln!(out, "n_in_band   {}", est.n_in_band).map_err(CovarError::Io)?;
    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" }).map_err(CovarError::Io)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_estimate(args: EstimateArgs, out: &mut dyn Write) -> CliResult {
    let family = match args.family.as_str() {
        "gaussian" => CopulaFamily::Gaussian,
        "t" => CopulaFamily::StudentT,
        "gumbel" => CopulaFamily::Gumbel,
        "clayton" => CopulaFamily::Clayton,
        other => {
            return Err(CliError::Usage(format!(
                "unknown family {other:?} (expected gaussian|t|gumbel|clayton)"
            )))
        }
    };
    let margins = match args.margins.as_str() {
        "normal" => MarginKind::Normal,
        "t" => MarginKind::StudentT,
        "empirical" => MarginKind::Empirical,
        other => {
            return Err(CliError::Usage(format!(
                "unknown margin kind {other:?} (expected normal|t|empirical)"
            )))
        }
    };
    let series = read_loss_csv(&args.input)?;
    let fit = estimate_model(&series, family, margins, args.nu)?;

    let copula_json = match &fit.copula {
        CopulaModel::Gaussian { rho } => json!({"family": "gaussian", "rho": rho}),
        CopulaModel::StudentT { rho, nu } => json!({"family": "t", "rho": rho, "nu": nu}),
        CopulaModel::Gumbel { theta } => json!({"family": "gumbel", "theta": theta}),
        CopulaModel::Clayton { theta } => json!({"family": "clayton", "theta": theta}),
        CopulaModel::Archimedean { .. } => json!({"family": "archimedean"}),
    };
    let margin_json = |m: &Margin| match m {
        Margin::Normal { mu, sigma } => json!({"kind": "normal", "mu": mu, "sigma": sigma}),
        Margin::StudentT { nu, loc, scale } => {
            json!({"kind": "t", "nu": nu, "loc": loc, "scale": scale})
        }
        Margin::Empirical { samples } => {
            json!({"kind": "empirical", "n": samples.len()})
        }
    };
    let mut payload = json!({
        "copula": copula_json,
        "margin_i": margin_json(&fit.margin_i),
        "margin_s": margin_json(&fit.margin_s),
        "kendall_tau": fit.kendall_tau,
        "n_obs": fit.n_obs,
    });

    if let (Some(alpha), Some(beta)) = (args.alpha, args.beta) {
        let model = fit.into_model();
        let report = covar(&model, &RiskQuery::new(alpha, Condition::AtQuantile(beta))?)?;
        payload["covar"] = json!({
            "covar": report.covar,
            "tilde_alpha": report.tilde_alpha,
            "var_s": report.var_s,
            "delta_covar": serde_json::Value::Null,
        });
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&payload).unwrap())
        .map_err(CovarError::Io)?;
    Ok(EXIT_OK)
}
