//! `dme`: sensitivity analysis for differential measurement error.
//!
//! Subcommands mirror the library: `outcome-rr` and `exposure-or` for binary
//! misclassification thresholds and bounds, `continuous-outcome` and
//! `continuous-exposure` for slope corrections, and `verify` for the
//! grid/Monte-Carlo certificates. Exit codes: 0 success, 1 usage, 2 invalid
//! input, 3 verification failure.

mod render;

use std::fs::File;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use dme_core::continuous::{ContinuousExposureSpec, ContinuousOutcomeSpec, OutcomeKind};
use dme_core::domain::{
    estimate_odds_ratio, estimate_risk_ratio, tables_from_csv, ContingencyTable,
    ObservedAssociation, RatioScale,
};
use dme_core::exposure::ExposureMisclassification;
use dme_core::oracle::{self, GridSpec};
use dme_core::outcome::OutcomeMisclassification;
use dme_core::report::{
    continuous_exposure_report, continuous_outcome_report, exposure_or_report, outcome_rr_report,
    CurveRange, DmeBoundReport, VerifyReport, VerifyResults,
};

#[derive(Parser)]
#[command(
    name = "dme",
    version,
    about = "Sensitivity analysis for differential measurement error",
    long_about = "Computes how strong differential measurement error would have to be to \
                  explain away or shift an observed association, bounds the true effect when \
                  error parameters are supplied, corrects slopes for continuous measurements, \
                  and certifies every implemented inequality against forward-model sweeps."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thresholds and bounds for a misclassified binary outcome (risk-ratio scale)
    OutcomeRr(OutcomeRrArgs),
    /// Thresholds and bounds for a misclassified binary exposure (odds-ratio scale)
    ExposureOr(ExposureOrArgs),
    /// Corrected slope for a mismeasured continuous outcome
    ContinuousOutcome(ContinuousOutcomeArgs),
    /// Corrected coefficient for a mismeasured continuous exposure
    ContinuousExposure(ContinuousExposureArgs),
    /// Certify the implemented bounds against their forward models
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Fixed-width text, rounded to 2 decimals for display
    Text,
    /// One structured JSON document at full precision
    #[value(alias = "json-shaped")]
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Observed association point estimate (alternative to --table)
    #[arg(long)]
    estimate: Option<f64>,

    /// 95% confidence limits, e.g. --ci 1.03,2.22 (with --estimate only)
    #[arg(long, value_name = "L,U", value_parser = parse_ci)]
    ci: Option<(f64, f64)>,

    /// Target value the estimate should be shifted to (between 1 and the estimate)
    #[arg(long)]
    target: Option<f64>,

    /// Long-format CSV of counts: exposure,outcome,count[,stratum]
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,

    /// Add 0.5 to every cell when the table contains a zero cell
    #[arg(long)]
    haldane: bool,

    /// Tabulate implied bound against assumed max DME: MIN,MAX,STEPS
    #[arg(long, value_name = "MIN,MAX,STEPS", value_parser = parse_curve)]
    curve: Option<(f64, f64, u32)>,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report to PATH instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutcomeRrArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Sensitivity of the outcome measurement among the exposed, P(Y*=1|Y=1,A=1)
    #[arg(long)]
    s1: Option<f64>,

    /// Sensitivity among the unexposed, P(Y*=1|Y=1,A=0)
    #[arg(long)]
    s0: Option<f64>,

    /// False-positive probability among the exposed, P(Y*=1|Y=0,A=1)
    #[arg(long)]
    f1: Option<f64>,

    /// False-positive probability among the unexposed, P(Y*=1|Y=0,A=0)
    #[arg(long)]
    f0: Option<f64>,
}

#[derive(Args)]
struct ExposureOrArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Sensitivity of the exposure measurement when the outcome is present, P(A*=1|Y=1,A=1)
    #[arg(long)]
    s1: Option<f64>,

    /// Sensitivity when the outcome is absent, P(A*=1|Y=0,A=1)
    #[arg(long)]
    s0: Option<f64>,

    /// False-positive probability when the outcome is present, P(A*=1|Y=1,A=0)
    #[arg(long)]
    f1: Option<f64>,

    /// False-positive probability when the outcome is absent, P(A*=1|Y=0,A=0)
    #[arg(long)]
    f0: Option<f64>,

    /// Treat a --estimate value as a risk ratio approximating the odds ratio
    /// (rare outcome); always adds a caveat to the report
    #[arg(long)]
    assume_rare_outcome: bool,
}

#[derive(Args)]
struct ContinuousOutcomeArgs {
    /// Observed slope of the mismeasured outcome on the exposure
    #[arg(long, allow_negative_numbers = true)]
    beta1_star: f64,

    /// Direct effect of the exposure on the outcome measurement
    #[arg(long, allow_negative_numbers = true)]
    gamma1: f64,

    /// Effect of the true outcome on its measurement (nonzero)
    #[arg(long, allow_negative_numbers = true)]
    gamma2: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ContinuousExposureArgs {
    /// Observed coefficient of the outcome on the mismeasured exposure
    #[arg(long, allow_negative_numbers = true)]
    coeff_star: f64,

    /// Direct effect of the outcome on the exposure measurement
    #[arg(long, allow_negative_numbers = true)]
    gamma1: f64,

    /// Variance of the true exposure within covariate strata
    #[arg(long)]
    sigma_a2: f64,

    /// Error variance of the exposure measurement
    #[arg(long)]
    sigma_u2: f64,

    /// Outcome model the coefficient comes from
    #[arg(long, value_enum, default_value_t = OutcomeKindArg::Linear)]
    outcome_kind: OutcomeKindArg,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutcomeKindArg {
    Linear,
    RareBinaryLogistic,
}

impl From<OutcomeKindArg> for OutcomeKind {
    fn from(kind: OutcomeKindArg) -> Self {
        match kind {
            OutcomeKindArg::Linear => OutcomeKind::Linear,
            OutcomeKindArg::RareBinaryLogistic => OutcomeKind::RareBinaryLogistic,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the four core certificates plus the exploratory Monte Carlo table
    #[arg(long)]
    all: bool,

    /// Run a single certificate
    #[arg(long, value_enum, conflicts_with = "all")]
    theorem: Option<TheoremArg>,

    /// Seed for the random draws
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Grid points per parameter axis
    #[arg(long, default_value_t = 7)]
    points_per_axis: u32,

    /// Seeded random draws per certificate
    #[arg(long, default_value_t = 100_000)]
    draws: u64,

    /// Lower end of the probability grid
    #[arg(long, default_value_t = 0.05)]
    lower: f64,

    /// Upper end of the probability grid
    #[arg(long, default_value_t = 0.95)]
    upper: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    /// Outcome misclassification bound, risk-ratio scale
    T1,
    /// Exposure misclassification bound, odds-ratio scale
    T2,
    /// Continuous-outcome correction round trip
    T3,
    /// Continuous-exposure correction round trip (non-differential)
    T4,
    /// Null contrapositive for the outcome bound
    T1Null,
    /// Null contrapositive for the exposure bound
    T2Null,
    /// Non-differential attenuation of the observed risk ratio
    Attenuation,
}

enum CliError {
    Usage(String),
    Core(dme_core::Error),
    Io(String),
}

impl From<dme_core::Error> for CliError {
    fn from(err: dme_core::Error) -> Self {
        CliError::Core(err)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(err) => write!(f, "{err}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 1,
        CliError::Core(dme_core::Error::InvalidCurveRange { .. }) => 1,
        CliError::Core(dme_core::Error::VerificationFailure { .. }) => 3,
        CliError::Core(_) | CliError::Io(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::OutcomeRr(args) => run_outcome(args),
        Command::ExposureOr(args) => run_exposure(args),
        Command::ContinuousOutcome(args) => run_continuous_outcome(args),
        Command::ContinuousExposure(args) => run_continuous_exposure(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn parse_ci(value: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = value
        .split_once(',')
        .ok_or_else(|| "expected two comma-separated limits, e.g. 1.03,2.22".to_owned())?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{s}' is not a number"))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn parse_curve(value: &str) -> Result<(f64, f64, u32), String> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 3 {
        return Err("expected MIN,MAX,STEPS, e.g. 1,2,21".to_owned());
    }
    let min = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("'{}' is not a number", parts[0]))?;
    let max = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("'{}' is not a number", parts[1]))?;
    let steps = parts[2]
        .trim()
        .parse::<u32>()
        .map_err(|_| format!("'{}' is not a step count", parts[2]))?;
    Ok((min, max, steps))
}

/// All four misclassification parameters, or none of them.
fn quad(
    s1: Option<f64>,
    s0: Option<f64>,
    f1: Option<f64>,
    f0: Option<f64>,
) -> Result<Option<(f64, f64, f64, f64)>, CliError> {
    match (s1, s0, f1, f0) {
        (Some(s1), Some(s0), Some(f1), Some(f0)) => Ok(Some((s1, s0, f1, f0))),
        (None, None, None, None) => Ok(None),
        _ => Err(CliError::Usage(
            "supply all four of --s1 --s0 --f1 --f0, or none".to_owned(),
        )),
    }
}

fn merge(base: Value, extra: Value) -> Value {
    let mut map = match base {
        Value::Object(map) => map,
        _ => Map::new(),
    };
    if let Value::Object(extra) = extra {
        map.extend(extra);
    }
    Value::Object(map)
}

/// One observed association per stratum, each with an inputs echo.
fn gather_observations(
    common: &CommonArgs,
    scale: RatioScale,
) -> Result<Vec<(ObservedAssociation, Value)>, CliError> {
    match (common.estimate, &common.table) {
        (Some(_), Some(_)) | (None, None) => Err(CliError::Usage(
            "supply exactly one of --estimate or --table".to_owned(),
        )),
        (Some(estimate), None) => {
            let observed = match common.ci {
                Some((lo, hi)) => ObservedAssociation::with_ci(estimate, scale, lo, hi)?,
                None => ObservedAssociation::new(estimate, scale)?,
            };
            if common.haldane {
                return Err(CliError::Usage(
                    "--haldane only applies to --table input".to_owned(),
                ));
            }
            let mut echo = json!({ "estimate": estimate, "scale": scale });
            if let Some((lo, hi)) = common.ci {
                echo = merge(echo, json!({ "ci": [lo, hi] }));
            }
            Ok(vec![(observed, echo)])
        }
        (None, Some(path)) => {
            if common.ci.is_some() {
                return Err(CliError::Usage(
                    "--ci conflicts with --table; limits are estimated from the counts".to_owned(),
                ));
            }
            let file = File::open(path)
                .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
            let tables = read_tables(file)?;
            tables
                .into_iter()
                .map(|table| {
                    let observed = match scale {
                        RatioScale::RiskRatio => estimate_risk_ratio(&table, common.haldane)?,
                        RatioScale::OddsRatio => estimate_odds_ratio(&table, common.haldane)?,
                    };
                    let (n11, n10, n01, n00) = table.counts();
                    let echo = json!({
                        "table": path.display().to_string(),
                        "stratum": table.stratum().unwrap_or("all"),
                        "counts": { "n11": n11, "n10": n10, "n01": n01, "n00": n00 },
                        "haldane": common.haldane,
                        "scale": scale,
                    });
                    Ok((observed, echo))
                })
                .collect()
        }
    }
}

fn read_tables<R: Read>(reader: R) -> Result<Vec<ContingencyTable>, CliError> {
    let tables = tables_from_csv(reader)?;
    if tables.is_empty() {
        return Err(CliError::Usage("the table contains no records".to_owned()));
    }
    Ok(tables)
}

fn common_echo(common: &CommonArgs, curve: Option<&CurveRange>) -> Value {
    let mut echo = json!({});
    if let Some(target) = common.target {
        echo = merge(echo, json!({ "target": target }));
    }
    if let Some(range) = curve {
        echo = merge(
            echo,
            json!({ "curve": { "min": range.min(), "max": range.max(), "steps": range.steps() } }),
        );
    }
    echo
}

fn curve_range(common: &CommonArgs) -> Result<Option<CurveRange>, CliError> {
    common
        .curve
        .map(|(min, max, steps)| CurveRange::new(min, max, steps))
        .transpose()
        .map_err(CliError::from)
}

fn run_outcome(args: OutcomeRrArgs) -> Result<(), CliError> {
    let params = quad(args.s1, args.s0, args.f1, args.f0)?;
    let misclassification = params
        .map(|(s1, s0, f1, f0)| OutcomeMisclassification::new(s1, s0, f1, f0))
        .transpose()?;
    let curve = curve_range(&args.common)?;

    let mut reports = Vec::new();
    for (observed, source_echo) in gather_observations(&args.common, RatioScale::RiskRatio)? {
        let mut inputs = merge(source_echo, common_echo(&args.common, curve.as_ref()));
        if let Some((s1, s0, f1, f0)) = params {
            inputs = merge(inputs, json!({ "s1": s1, "s0": s0, "f1": f1, "f0": f0 }));
        }
        reports.push(outcome_rr_report(
            &observed,
            misclassification.as_ref(),
            args.common.target,
            curve.as_ref(),
            inputs,
        )?);
    }
    emit_bound_reports(&reports, args.common.format, args.common.out.as_deref())
}

fn run_exposure(args: ExposureOrArgs) -> Result<(), CliError> {
    let params = quad(args.s1, args.s0, args.f1, args.f0)?;
    let misclassification = params
        .map(|(s1, s0, f1, f0)| ExposureMisclassification::new(s1, s0, f1, f0))
        .transpose()?;
    let curve = curve_range(&args.common)?;

    // under the rare-outcome assumption a summary estimate is a risk ratio
    let input_scale = if args.assume_rare_outcome && args.common.table.is_none() {
        RatioScale::RiskRatio
    } else {
        RatioScale::OddsRatio
    };

    let mut reports = Vec::new();
    for (observed, source_echo) in gather_observations(&args.common, input_scale)? {
        let mut inputs = merge(source_echo, common_echo(&args.common, curve.as_ref()));
        if let Some((s1, s0, f1, f0)) = params {
            inputs = merge(inputs, json!({ "s1": s1, "s0": s0, "f1": f1, "f0": f0 }));
        }
        if args.assume_rare_outcome {
            inputs = merge(inputs, json!({ "assume_rare_outcome": true }));
        }
        reports.push(exposure_or_report(
            &observed,
            misclassification.as_ref(),
            args.common.target,
            curve.as_ref(),
            args.assume_rare_outcome,
            inputs,
        )?);
    }
    emit_bound_reports(&reports, args.common.format, args.common.out.as_deref())
}

fn run_continuous_outcome(args: ContinuousOutcomeArgs) -> Result<(), CliError> {
    let spec = ContinuousOutcomeSpec::new(args.beta1_star, args.gamma1, args.gamma2)?;
    let inputs = json!({
        "beta1_star": args.beta1_star,
        "gamma1": args.gamma1,
        "gamma2": args.gamma2,
    });
    let report = continuous_outcome_report(&spec, inputs);
    emit_bound_reports(&[report], args.format, args.out.as_deref())
}

fn run_continuous_exposure(args: ContinuousExposureArgs) -> Result<(), CliError> {
    let kind = OutcomeKind::from(args.outcome_kind);
    let spec = ContinuousExposureSpec::new(
        args.coeff_star,
        args.gamma1,
        args.sigma_a2,
        args.sigma_u2,
        kind,
    )?;
    let inputs = json!({
        "coeff_star": args.coeff_star,
        "gamma1": args.gamma1,
        "sigma_a2": args.sigma_a2,
        "sigma_u2": args.sigma_u2,
        "outcome_kind": kind,
        "lambda": spec.lambda(),
    });
    let report = continuous_exposure_report(&spec, inputs);
    emit_bound_reports(&[report], args.format, args.out.as_deref())
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.all == args.theorem.is_some() {
        return Err(CliError::Usage(
            "supply exactly one of --all or --theorem".to_owned(),
        ));
    }
    let spec = GridSpec::new(
        args.points_per_axis,
        args.lower,
        args.upper,
        args.draws,
        args.seed,
    )?;

    let (reports, exploration) = if args.all {
        (
            oracle::verify_all(&spec)?,
            Some(oracle::explore_theorem4_differential(args.seed)),
        )
    } else {
        let report = match args.theorem.expect("checked above") {
            TheoremArg::T1 => oracle::verify_theorem1(&spec)?,
            TheoremArg::T2 => oracle::verify_theorem2(&spec)?,
            TheoremArg::T3 => oracle::verify_theorem3(&spec)?,
            TheoremArg::T4 => oracle::verify_theorem4_nondifferential(&spec)?,
            TheoremArg::T1Null => oracle::verify_theorem1_null_slice(&spec)?,
            TheoremArg::T2Null => oracle::verify_theorem2_null_slice(&spec)?,
            TheoremArg::Attenuation => oracle::verify_nondifferential_attenuation(&spec)?,
        };
        (vec![report], None)
    };

    let theorem_echo = match args.theorem {
        Some(t) => json!(t.to_possible_value().expect("skip is unset").get_name()),
        None => Value::Null,
    };
    let doc = VerifyReport {
        mode: "verify".to_owned(),
        inputs: json!({
            "all": args.all,
            "theorem": theorem_echo,
            "seed": args.seed,
            "points_per_axis": args.points_per_axis,
            "draws": args.draws,
            "lower": args.lower,
            "upper": args.upper,
        }),
        results: VerifyResults {
            reports,
            theorem4_exploration: exploration,
        },
        warnings: Vec::new(),
    };

    let rendered = match args.format {
        Format::Text => render::verify_text(&doc),
        Format::Json => to_pretty_json(&doc)?,
    };
    write_output(&rendered, args.out.as_deref())
}

fn emit_bound_reports(
    reports: &[DmeBoundReport],
    format: Format,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let rendered = match format {
        Format::Text => reports
            .iter()
            .map(render::bound_report_text)
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Json => {
            if reports.len() == 1 {
                to_pretty_json(&reports[0])?
            } else {
                to_pretty_json(&reports)?
            }
        }
    };
    write_output(&rendered, out)
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))
}

fn write_output(rendered: &str, out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
