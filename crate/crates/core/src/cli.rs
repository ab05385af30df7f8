//! Command-line driver: argument and config-file parsing, command execution
//! and report output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::engine::{FunctionSpec, RegionSpec, Sweep, CSV_HEADER};
use crate::error::SqcError;
use crate::geometry::SamplerConfig;
use crate::report::{csv_lines, CheckResult, Format, Report, Status};
use crate::suite::{registry, run_suite, CheckSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default certification tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Certify,
    Estimate,
    Paper,
    Dump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "sqclab", version, about = "Estimate, certify and refute strong quasiconvexity moduli")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration (function, region, sigma, seed, samples, ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Registered check to run (paper command); all checks when omitted.
    #[arg(long)]
    check: Option<String>,
    /// Check parameter as KEY=VALUE; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled pairs.
    #[arg(long)]
    samples: Option<usize>,
    /// Evaluate every pair at this single λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of worst triples handed to local refinement.
    #[arg(long)]
    refine: Option<usize>,
    /// Certification tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    function: Option<FunctionSpec>,
    region: Option<RegionSpec>,
    sigma: Option<f64>,
    seed: Option<u64>,
    samples: Option<usize>,
    lambda: Option<f64>,
    refine: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<String>,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub function: Option<FunctionSpec>,
    pub region: Option<RegionSpec>,
    pub sigma: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub lambda: Option<f64>,
    pub refine: usize,
    pub tol: f64,
    pub check: Option<String>,
    pub params: Vec<(String, f64)>,
    pub out_path: Option<PathBuf>,
    pub format: Format,
}

/// A usage or configuration problem, reported on one line with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

impl RunConfig {
    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            seed: self.seed,
            n_pairs: self.samples,
            refine: self.refine,
            fixed_lambda: self.lambda,
            ..SamplerConfig::default()
        }
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

fn parse_param(raw: &str) -> Result<(String, f64), UsageError> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| usage(format!("--param `{raw}` must look like KEY=VALUE")))?;
    let value = v
        .trim()
        .parse::<f64>()
        .map_err(|_| usage(format!("--param `{k}`: `{v}` is not a number")))?;
    Ok((k.trim().to_string(), value))
}

/// Parses arguments (program name first) and any `--config` file into a
/// validated [`RunConfig`]. Command-line flags override file values.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| {
        let text = e.to_string();
        usage(text.lines().next().unwrap_or("invalid arguments").to_string())
    })?;
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => ConfigFile::default(),
    };
    let format = match (args.format, &file.format) {
        (Some(FormatArg::Json), _) => Format::Json,
        (Some(FormatArg::Csv), _) => Format::Csv,
        (None, Some(f)) => f.parse().map_err(|e: String| usage(format!("config key `format`: {e}")))?,
        (None, None) if args.command == Command::Dump => Format::Csv,
        (None, None) => Format::Json,
    };
    let params = args
        .params
        .iter()
        .map(|p| parse_param(p))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = RunConfig {
        command: args.command,
        function: file.function,
        region: file.region,
        sigma: args.sigma.or(file.sigma),
        seed: args.seed.or(file.seed).unwrap_or(0),
        samples: args.samples.or(file.samples).unwrap_or(SamplerConfig::default().n_pairs),
        lambda: args.lambda.or(file.lambda),
        refine: args.refine.or(file.refine).unwrap_or(SamplerConfig::default().refine),
        tol: args.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
        check: args.check,
        params,
        out_path: args.out.or(file.out),
        format,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), UsageError> {
    let needs_problem = matches!(cfg.command, Command::Certify | Command::Estimate | Command::Dump);
    if needs_problem {
        if cfg.function.is_none() {
            return Err(usage("missing key `function` (pass it in --config)"));
        }
        if cfg.region.is_none() {
            return Err(usage("missing key `region` (pass it in --config)"));
        }
        if cfg.check.is_some() {
            return Err(usage("`--check` only applies to the paper command"));
        }
        if !cfg.params.is_empty() {
            return Err(usage("`--param` only applies to the paper command"));
        }
    } else {
        if cfg.function.is_some() {
            return Err(usage("key `function` does not apply to the paper command"));
        }
        if cfg.region.is_some() {
            return Err(usage("key `region` does not apply to the paper command"));
        }
        if cfg.sigma.is_some() {
            return Err(usage("key `sigma` does not apply to the paper command"));
        }
        if cfg.check.is_none() && !cfg.params.is_empty() {
            return Err(usage("`--param` needs `--check`"));
        }
    }
    match (cfg.command, cfg.sigma) {
        (Command::Certify, None) => return Err(usage("certify requires key `sigma`")),
        (Command::Estimate, Some(_)) => return Err(usage("estimate does not accept key `sigma`")),
        (_, Some(s)) if !(s >= 0.0) || !s.is_finite() => {
            return Err(usage(format!("key `sigma` must be a nonnegative number, got {s}")))
        }
        _ => {}
    }
    if cfg.samples == 0 {
        return Err(usage("key `samples` must be positive"));
    }
    if let Some(l) = cfg.lambda {
        if !(l > 0.0 && l < 1.0) {
            return Err(usage(format!("key `lambda` must lie in (0, 1), got {l}")));
        }
    }
    if !(cfg.tol >= 0.0) {
        return Err(usage(format!("key `tol` must be nonnegative, got {}", cfg.tol)));
    }
    if let (Some(f), Some(r)) = (&cfg.function, &cfg.region) {
        if let Some(d) = crate::engine::Objective::dim(f) {
            if d != r.dim() {
                return Err(usage(format!(
                    "key `region` has dimension {} but `function` has dimension {d}",
                    r.dim()
                )));
            }
        }
    }
    Ok(())
}

/// What a run produced: the text to write, its exit code and warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub exit_code: i32,
    pub warnings: Vec<String>,
}

fn problem_error(e: SqcError) -> Result<RunOutput, UsageError> {
    match e {
        SqcError::NumericFailure { .. } => Ok(RunOutput {
            text: String::new(),
            exit_code: EXIT_FAIL,
            warnings: vec![format!("error: {e}")],
        }),
        other => Err(usage(other.to_string())),
    }
}

fn single_check(name: &str, cfg: &RunConfig, result: CheckResult) -> RunOutput {
    let report = Report::new(name, vec![result]);
    RunOutput {
        text: report.emit(cfg.format),
        exit_code: report.exit_code(),
        warnings: report.warnings(),
    }
}

/// Executes a validated run.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, UsageError> {
    let start = std::time::Instant::now();
    let sampler = cfg.sampler();
    let mut params = BTreeMap::new();
    params.insert("samples".to_string(), cfg.samples as f64);
    params.insert("refine".to_string(), cfg.refine as f64);
    if let Some(l) = cfg.lambda {
        params.insert("lambda".to_string(), l);
    }
    match cfg.command {
        Command::Certify => {
            let (f, region) = (cfg.function.as_ref().unwrap(), cfg.region.as_ref().unwrap());
            let sigma = cfg.sigma.unwrap();
            params.insert("tol".to_string(), cfg.tol);
            let cert = match Sweep::run(f, region, &sampler).and_then(|s| s.certify(sigma, cfg.tol)) {
                Ok(c) => c,
                Err(e) => return problem_error(e),
            };
            params.insert("worst_defect".to_string(), cert.worst_defect);
            let result = CheckResult {
                name: "certify".into(),
                params,
                status: if cert.passed { Status::Pass } else { Status::Fail },
                sigma_hat: None,
                sigma: Some(sigma),
                witness: cert.witness,
                n_samples: cert.n_triples,
                seed: cfg.seed,
                runtime_ms: start.elapsed().as_millis() as u64,
            };
            Ok(single_check("certify", cfg, result))
        }
        Command::Estimate => {
            let (f, region) = (cfg.function.as_ref().unwrap(), cfg.region.as_ref().unwrap());
            let est = match crate::engine::sigma_hat(f, region, &sampler) {
                Ok(e) => e,
                Err(e) => return problem_error(e),
            };
            let violated = est.sigma_hat < 0.0;
            let result = CheckResult {
                name: "estimate".into(),
                params,
                status: if violated { Status::Fail } else { Status::Pass },
                sigma_hat: Some(est.sigma_hat),
                sigma: None,
                witness: violated.then(|| est.witness.at_sigma(0.0)),
                n_samples: est.n_triples,
                seed: cfg.seed,
                runtime_ms: start.elapsed().as_millis() as u64,
            };
            Ok(single_check("estimate", cfg, result))
        }
        Command::Dump => {
            let (f, region) = (cfg.function.as_ref().unwrap(), cfg.region.as_ref().unwrap());
            let rows = match Sweep::run(f, region, &sampler) {
                Ok(s) => s.rows(cfg.sigma.unwrap_or(0.0)),
                Err(e) => return problem_error(e),
            };
            let text = match cfg.format {
                Format::Csv => csv_lines(&rows),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
                    s.push('\n');
                    s
                }
            };
            debug_assert!(text.starts_with(CSV_HEADER) || cfg.format == Format::Json);
            Ok(RunOutput {
                text,
                exit_code: EXIT_OK,
                warnings: vec![],
            })
        }
        Command::Paper => {
            let specs = match &cfg.check {
                Some(name) => {
                    let mut spec = CheckSpec::new(name).map_err(|e| usage(e.to_string()))?;
                    for (k, v) in &cfg.params {
                        spec = spec.with_param(k, *v).map_err(|e| usage(e.to_string()))?;
                    }
                    vec![spec]
                }
                None => registry(),
            };
            let report = match run_suite(&specs, &sampler) {
                Ok(r) => r,
                Err(e) => return problem_error(e),
            };
            Ok(RunOutput {
                text: report.emit(cfg.format),
                exit_code: report.exit_code(),
                warnings: report.warnings(),
            })
        }
    }
}

/// Caps the worker pool from SQCLAB_THREADS.
pub fn configure_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("SQCLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage(format!("SQCLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot size the worker pool: {e}")))
}

/// Full program: parse, run, write, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = configure_threads()
        .and_then(|_| parse_config(argv))
        .and_then(|cfg| execute(&cfg).map(|out| (cfg, out)));
    let (cfg, out) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("sqclab: {e}");
            return EXIT_USAGE;
        }
    };
    for w in &out.warnings {
        eprintln!("{w}");
    }
    match &cfg.out_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.text) {
                eprintln!("sqclab: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{}", out.text),
    }
    out.exit_code
}
