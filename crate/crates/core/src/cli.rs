//! Command-line front end.
//!
//! Exit codes: 0 everything passed, 1 a check failed, 2 the inputs violate
//! a precondition (for example `κ ≥ 1`), 64 the command line or config
//! could not be parsed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::config::{make_reference, ReferenceKind, RunConfig, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::moebius::{validate, ValidationCheck, ValidationReport};
use crate::phasespace::contraction_factor;
use crate::quadrature::deformed_circle;
use crate::verify::{CheckGroup, CheckReport, Tolerances, Verifier};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "schottky-lax", version, about = "Build Lax operators on Schottky curves and certify their identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Screen a config: disc geometry, contraction factor, phase point, contours.
    Validate(Common),
    /// Run checks and write one JSON report per line.
    Check {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check names, or `all`.
        #[arg(long, value_name = "LIST", default_value = "all")]
        checks: String,
    },
    /// Re-run checks across a range of one parameter and write CSV rows.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check names; defaults depend on the parameter.
        #[arg(long, value_name = "LIST")]
        checks: Option<String>,
        parameter: ScanParameter,
        /// `a..b` (inclusive) or a comma-separated list.
        range: String,
    },
    /// Write a seeded reference configuration.
    MakeReference {
        /// `genus1` or `genus2`.
        kind: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output file; defaults to the config's outputPath, then stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Overrides the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the truncation word-length cap.
    #[arg(long, value_name = "INT")]
    max_word_length: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VAL", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScanParameter {
    #[value(name = "maxWordLength")]
    MaxWordLength,
    #[value(name = "quadratureNodes")]
    QuadratureNodes,
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VAL, got {s:?}"))?;
    let v: f64 = value.trim().parse().map_err(|e| format!("bad tolerance value {value:?}: {e}"))?;
    Ok((name.trim().to_string(), v))
}

/// Inclusive `a..b` / `a..=b`, or a comma-separated list.
fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = |e: &dyn std::fmt::Display| Error::Config(format!("bad range {s:?}: {e}"));
    let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|e| bad(&e))?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|e| bad(&e))?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|e| bad(&e)))
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(Error::Config(format!("range {s:?} is empty")));
    }
    Ok(values)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_precondition() {
        EXIT_PRECONDITION
    } else {
        match e {
            Error::Config(_) | Error::Json(_) | Error::Io(_) => EXIT_USAGE,
            _ => EXIT_CHECK_FAILED,
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::default().filter_or("SCHOTTKY_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Results go to stdout or `--out`, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if code == EXIT_USAGE {
                eprintln!("{}", Cli::command().render_usage());
            }
            code
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Validate(common) => {
            let (cfg, out) = load(&common)?;
            let report = screen(&cfg);
            write_output(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("failed: {} ({})", c.name, c.detail);
            }
            Ok(if report.passed() { EXIT_PASS } else { EXIT_PRECONDITION })
        }
        Command::Check { common, checks } => {
            let groups = CheckGroup::parse_list(&checks)?;
            let (cfg, out) = load(&common)?;
            require_valid(&cfg)?;
            let reports = Verifier::new(&cfg)?.run_all(&groups)?;
            let mut text = String::new();
            for r in &reports {
                text.push_str(&serde_json::to_string(r)?);
                text.push('\n');
            }
            write_output(out.as_deref(), &text)?;
            Ok(if reports.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Scan { common, checks, parameter, range } => {
            let values = parse_range(&range)?;
            let groups = match (&checks, parameter) {
                (Some(list), _) => CheckGroup::parse_list(list)?,
                (None, ScanParameter::MaxWordLength) => CheckGroup::ALL.to_vec(),
                (None, ScanParameter::QuadratureNodes) => vec![CheckGroup::Pairing, CheckGroup::Lemma3],
            };
            let (cfg, out) = load(&common)?;
            require_valid(&cfg)?;
            let text = scan(&cfg, parameter, &values, &groups)?;
            write_output(out.as_deref(), &text)?;
            Ok(EXIT_PASS)
        }
        Command::MakeReference { kind, seed, out } => {
            let kind: ReferenceKind = kind.parse()?;
            let cfg = make_reference(kind, seed.unwrap_or(DEFAULT_SEED))?;
            write_output(out.as_deref(), &cfg.to_json()?)?;
            Ok(EXIT_PASS)
        }
    }
}

/// The config with command-line overrides applied, and where output goes.
fn load(common: &Common) -> Result<(RunConfig, Option<PathBuf>)> {
    let mut cfg = RunConfig::load(&common.config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", common.config.display())),
        other => other,
    })?;
    if let Some(seed) = common.seed {
        cfg.samples.seed = seed;
    }
    if let Some(l) = common.max_word_length {
        cfg.truncation.max_word_length = l;
    }
    for (name, v) in &common.tolerances {
        cfg.tolerances.insert(name.clone(), *v);
    }
    Tolerances::new(cfg.truncation.target_tail, &cfg.tolerances)?;
    let out = common.out.clone().or_else(|| cfg.output_path.clone());
    Ok((cfg, out))
}

fn screen_check(name: &str, pass: bool, margin: Option<f64>, detail: String) -> ValidationCheck {
    ValidationCheck { name: name.to_string(), pass, margin, detail }
}

/// Geometry checks followed by the contraction criterion, the phase point,
/// the truncation policy and the deformed contours.
pub fn screen(cfg: &RunConfig) -> ValidationReport {
    let mut report = validate(&cfg.schottky);
    let checks = &mut report.checks;
    match contraction_factor(&cfg.algebra, &cfg.phase, &cfg.schottky) {
        Ok(k) => checks.push(screen_check("lemma1-criterion", k < 1.0, Some(1.0 - k), format!("contraction factor κ = {k:.6}"))),
        Err(e) => checks.push(screen_check("lemma1-criterion", false, None, e.to_string())),
    }
    let phase = if cfg.phase.genus() != cfg.genus() {
        Err(Error::Shape(format!("phase point has genus {}, geometry has {}", cfg.phase.genus(), cfg.genus())))
    } else {
        cfg.phase.validate(&cfg.algebra)
    };
    checks.push(screen_check("phase-point", phase.is_ok(), None, phase.err().map_or_else(|| "ok".into(), |e| e.to_string())));
    let t = &cfg.truncation;
    let policy_ok = t.target_tail > 0.0 && t.target_tail.is_finite() && t.capacity > 0;
    checks.push(screen_check("truncation-policy", policy_ok, None, format!("{t:?}")));
    let s = &cfg.samples;
    let samples_ok = s.points > 0 && s.pairs > 0 && s.triples > 0 && s.quadrature_nodes >= 4 && s.quadrature_nodes <= s.max_quadrature_nodes;
    checks.push(screen_check("sample-spec", samples_ok, None, format!("{s:?}")));
    let contours: Result<Vec<_>> = (0..cfg.genus()).map(|i| deformed_circle(&cfg.schottky, i, s.epsilon)).collect();
    checks.push(screen_check("deformed-contours", contours.is_ok(), None, contours.err().map_or_else(|| format!("ε = {}", s.epsilon), |e| e.to_string())));
    report
}

fn require_valid(cfg: &RunConfig) -> Result<()> {
    let report = screen(cfg);
    if let Some(bad) = report.checks.iter().find(|c| !c.pass) {
        if bad.name == "lemma1-criterion" {
            let kappa = cfg.kappa().unwrap_or(f64::NAN);
            return Err(Error::ConvergenceCriterionViolated { kappa });
        }
        return Err(Error::ScreenFailed { check: bad.name.clone(), detail: bad.detail.clone() });
    }
    Ok(())
}

const CSV_HEADER: &str = "parameter,value,check,residual,tolerance,tailBudget,pass,runtimeMs";

fn scan(cfg: &RunConfig, parameter: ScanParameter, values: &[usize], groups: &[CheckGroup]) -> Result<String> {
    let name = match parameter {
        ScanParameter::MaxWordLength => "maxWordLength",
        ScanParameter::QuadratureNodes => "quadratureNodes",
    };
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for &v in values {
        let mut c = cfg.clone();
        match parameter {
            ScanParameter::MaxWordLength => c.truncation.max_word_length = v,
            ScanParameter::QuadratureNodes => {
                c.samples.quadrature_nodes = v;
                c.samples.max_quadrature_nodes = v;
            }
        }
        log::info!("scan {name} = {v}");
        let reports: Vec<CheckReport> = Verifier::new(&c)?.run_all(groups)?;
        for r in reports {
            text.push_str(&format!(
                "{name},{v},{},{:e},{:e},{:e},{},{:.1}\n",
                r.check_name, r.residual, r.tolerance, r.tail_budget, r.pass, r.runtime_ms
            ));
        }
    }
    Ok(text)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
