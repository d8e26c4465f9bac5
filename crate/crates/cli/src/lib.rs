//! Command-line front end: `run`, `race`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 divergence in `run` (or a runtime failure),
//! 2 invalid flags, 3 `verify` failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use bundle_accel::bench::{
    alpha_grid, convergence_experiment, default_race, robustness_sweep, summarize, tune_alpha, write_experiment,
    write_long_csv, write_sweep_csv, ExperimentSummary,
};
use bundle_accel::trace::write_trace_csv;
use bundle_accel::{verify, Algorithm, BundleConfig, InstanceSpec, LeastSquares, ModelVariant, ProblemOracle, SolverConfig, Trace};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const THREADS_ENV: &str = "BUNDLE_ACCEL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bundle-accel", version, about = "Accelerated proximal bundle method experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver and write its trace.
    Run(RunArgs),
    /// Run GD, PBM, AGD and APBM side by side.
    Race(RaceArgs),
    /// Final residual over a grid of step multipliers.
    Sweep(SweepArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Number of samples (rows of E).
    #[arg(long = "N", value_name = "N", conflicts_with = "config")]
    pub samples: Option<usize>,
    /// Dimension (columns of E).
    #[arg(long = "n", value_name = "n", conflicts_with = "config")]
    pub dim: Option<usize>,
    /// Instance seed.
    #[arg(long, conflicts_with = "config")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON file with `instance` and `solvers` (and `alphas` for sweep); excludes the instance and algorithm flags.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for CSV/JSON outputs; stdout when absent.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for parallel experiments.
    #[arg(long, env = THREADS_ENV, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Algorithm: gd, agd, pbm or apbm.
    #[arg(long, value_parser = parse_algorithm, conflicts_with = "config")]
    pub algo: Option<Algorithm>,
    /// Bundle model: polyak, cutting-plane, polyak-cutting-plane or two-cut.
    #[arg(long, value_parser = parse_model, conflicts_with = "config")]
    pub model: Option<ModelVariant>,
    /// Bundle capacity.
    #[arg(long, conflicts_with = "config")]
    pub m: Option<usize>,
    /// Floor for the polyak models (defaults to f*).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "config")]
    pub floor: Option<f64>,
    /// Step multiplier; the step is alpha / L.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "config")]
    pub alpha: Option<f64>,
    /// Iteration budget.
    #[arg(long, conflicts_with = "config")]
    pub iters: Option<usize>,
    /// Fixed restart period (AGD and APBM).
    #[arg(long, conflicts_with = "config")]
    pub restart: Option<usize>,
    /// Subproblem (dual) tolerance.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "config")]
    pub tol: Option<f64>,
    /// Stop once the gradient norm falls to this value.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "config")]
    pub grad_tol: Option<f64>,
    /// Record every k-th iterate (the last one is always recorded).
    #[arg(long, conflicts_with = "config")]
    pub record_every: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RaceArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Bundle capacity for PBM and APBM.
    #[arg(long, conflicts_with = "config")]
    pub m: Option<usize>,
    /// Iteration budget.
    #[arg(long, conflicts_with = "config")]
    pub iters: Option<usize>,
    /// Fixed restart period applied to AGD and APBM.
    #[arg(long, conflicts_with = "config")]
    pub restart: Option<usize>,
    /// Record every k-th iterate.
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Pick each method's alpha from the grid before racing.
    #[arg(long)]
    pub tune: bool,
    /// Residual target used when tuning.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1e-6)]
    pub target: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Smallest alpha in the grid
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.25)]
    pub alpha_min: f64,
    /// Largest alpha in the grid
    #[arg(long, allow_negative_numbers = true, default_value_t = 4.0)]
    pub alpha_max: f64,
    /// Grid spacing
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.25)]
    pub alpha_step: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Comma-separated algorithms to sweep.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, conflicts_with = "config")]
    pub algo: Option<Vec<Algorithm>>,
    /// Bundle model for PBM and APBM.
    #[arg(long, value_parser = parse_model, conflicts_with = "config")]
    pub model: Option<ModelVariant>,
    /// Bundle capacity for PBM and APBM.
    #[arg(long, conflicts_with = "config")]
    pub m: Option<usize>,
    /// Iterations per cell.
    #[arg(long, conflicts_with = "config")]
    pub iters: Option<usize>,
    /// Fixed restart period applied to AGD and APBM.
    #[arg(long, conflicts_with = "config")]
    pub restart: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Small instances and short runs only.
    #[arg(long)]
    pub quick: bool,
    /// Output encoding of the report.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads.
    #[arg(long, env = THREADS_ENV, value_name = "N")]
    pub threads: Option<usize>,
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub solvers: Vec<SolverConfig>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> bundle_accel::Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.instance.validate()?;
        for solver in &config.solvers {
            solver.validate()?;
        }
        Ok(config)
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: bundle_accel::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<ModelVariant, String> {
    s.parse().map_err(|e: bundle_accel::Error| e.to_string())
}

/// Failure classes, each with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
    Diverged(String),
    VerifyFailed(usize),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Runtime(_) | Self::Diverged(_) => EXIT_DIVERGED,
            Self::VerifyFailed(_) => EXIT_VERIFY,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Runtime(e)
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = match &failure {
                Failure::Usage(msg) => writeln!(stderr, "error: {msg}"),
                Failure::Runtime(e) => writeln!(stderr, "error: {e:#}"),
                Failure::Diverged(msg) => writeln!(stderr, "diverged: {msg}"),
                Failure::VerifyFailed(n) => writeln!(stderr, "verify: {n} check(s) failed"),
            };
            failure.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Run(args) => run_command(args, out),
        Command::Race(args) => race_command(args, out),
        Command::Sweep(args) => sweep_command(args, out),
        Command::Verify(args) => verify_command(args, out),
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // a second configuration in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("--config {}: {e}", path.display())))?;
    ConfigFile::from_json(&text).map_err(|e| usage(format!("--config {}: {e}", path.display())))
}

fn instance_spec(args: &InstanceArgs) -> Result<InstanceSpec, Failure> {
    let spec = InstanceSpec::least_squares(args.samples.unwrap_or(100), args.dim.unwrap_or(100), args.seed.unwrap_or(1));
    spec.validate().map_err(|e| usage(flag_error(&e)))?;
    Ok(spec)
}

/// Names the offending flag for configuration errors.
fn flag_error(e: &bundle_accel::Error) -> String {
    match e {
        bundle_accel::Error::InvalidParameter { name, reason } => {
            let flag = match *name {
                "bundle" => "model",
                "record_every" => "record-every",
                "grad_tol" => "grad-tol",
                "samples" => "N",
                "dim" => "n",
                other => other,
            };
            format!("--{flag}: {reason}")
        }
        other => other.to_string(),
    }
}

fn bundle_config(algorithm: Algorithm, model: Option<ModelVariant>, m: Option<usize>, floor: Option<f64>) -> Result<Option<BundleConfig>, Failure> {
    if algorithm.uses_bundle() {
        let model = model.unwrap_or(ModelVariant::CuttingPlane);
        let mut bundle = BundleConfig::new(model, m.unwrap_or(15));
        if let Some(floor) = floor {
            bundle = bundle.with_floor(floor);
        }
        Ok(Some(bundle))
    } else {
        for (given, flag) in [(model.is_some(), "--model"), (m.is_some(), "--m"), (floor.is_some(), "--floor")] {
            if given {
                return Err(usage(format!("{flag}: {algorithm} does not use a bundle model")));
            }
        }
        Ok(None)
    }
}

fn build_instance(spec: &InstanceSpec) -> Result<LeastSquares, Failure> {
    spec.build()
        .map_err(|e| Failure::Runtime(anyhow!(e).context("building the instance")))
}

/// Parameter errors surfaced by the library are flag errors; anything else is a runtime failure.
fn library_error(e: bundle_accel::Error) -> Failure {
    match e {
        bundle_accel::Error::InvalidParameter { .. } => usage(flag_error(&e)),
        other => Failure::Runtime(anyhow!(other)),
    }
}

fn run_command(args: RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    configure_threads(args.common.threads)?;
    let (spec, config) = match &args.common.config {
        Some(path) => {
            let file = load_config(path)?;
            let [config]: [SolverConfig; 1] = file
                .solvers
                .try_into()
                .map_err(|v: Vec<SolverConfig>| usage(format!("--config: run needs exactly one solver, got {}", v.len())))?;
            (file.instance, config)
        }
        None => {
            let spec = instance_spec(&args.instance)?;
            let algorithm = args.algo.unwrap_or(Algorithm::Apbm);
            let mut config = SolverConfig::new(algorithm, args.iters.unwrap_or(2000));
            config.bundle = bundle_config(algorithm, args.model, args.m, args.floor)?;
            config.alpha = args.alpha.unwrap_or(1.0);
            config.restart_period = args.restart;
            if let Some(tol) = args.tol {
                config.dual_tol = tol;
            }
            config.grad_tol = args.grad_tol;
            config.record_every = args.record_every.unwrap_or(1);
            config.validate().map_err(|e| usage(flag_error(&e)))?;
            (spec, config)
        }
    };
    let instance = build_instance(&spec)?;
    let x0 = DVector::zeros(instance.dim());
    let trace = bundle_accel::run(&config, &instance, &x0).map_err(library_error)?;
    let configs = [config];
    let summary = summarize(Some(spec), &instance, &configs, std::slice::from_ref(&trace), &x0);
    emit_traces(&args.common, std::slice::from_ref(&trace), &summary, out)?;
    if trace.diverged() {
        return Err(Failure::Diverged(format!("{} diverged at k={}", trace.label, trace.last().k)));
    }
    Ok(())
}

fn emit_traces(common: &CommonArgs, traces: &[Trace], summary: &ExperimentSummary, out: &mut dyn Write) -> Result<(), Failure> {
    match (&common.out_dir, common.format) {
        (Some(dir), Format::Csv) => {
            let written = write_experiment(dir, traces, summary).context("writing outputs")?;
            for path in written {
                writeln!(out, "{}", path.display()).context("writing to stdout")?;
            }
        }
        (Some(dir), Format::Json) => {
            fs::create_dir_all(dir).context("creating the output directory")?;
            for trace in traces {
                let path = dir.join(format!("{}.json", trace.label));
                fs::write(&path, serde_json::to_string_pretty(&trace.records).context("encoding trace")?)
                    .with_context(|| format!("writing {}", path.display()))?;
                writeln!(out, "{}", path.display()).context("writing to stdout")?;
            }
            let path = dir.join("summary.json");
            fs::write(&path, serde_json::to_string_pretty(summary).context("encoding summary")?)
                .with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "{}", path.display()).context("writing to stdout")?;
        }
        (None, Format::Csv) if traces.len() == 1 => {
            write_trace_csv(&traces[0].records, &mut *out).context("writing trace")?;
        }
        (None, Format::Csv) => {
            write_long_csv(traces, &mut *out).context("writing traces")?;
        }
        (None, Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, summary).context("writing summary")?;
            writeln!(out).context("writing to stdout")?;
        }
    }
    Ok(())
}

fn grid(args: &GridArgs) -> Result<Vec<f64>, Failure> {
    alpha_grid(args.alpha_min, args.alpha_max, args.alpha_step).map_err(|e| usage(flag_error(&e)))
}

fn race_command(args: RaceArgs, out: &mut dyn Write) -> Result<(), Failure> {
    configure_threads(args.common.threads)?;
    let alphas = grid(&args.grid)?;
    if !(args.target > 0.0) {
        return Err(usage("--target must be positive"));
    }
    let (spec, mut configs) = match &args.common.config {
        Some(path) => {
            let file = load_config(path)?;
            let configs = if file.solvers.is_empty() { default_race(2000) } else { file.solvers };
            (file.instance, configs)
        }
        None => {
            let spec = instance_spec(&args.instance)?;
            let mut configs = default_race(args.iters.unwrap_or(2000));
            for config in &mut configs {
                if let (Some(bundle), Some(m)) = (config.bundle.as_mut(), args.m) {
                    bundle.m = m;
                }
                if config.algorithm.uses_momentum() {
                    config.restart_period = args.restart;
                }
            }
            (spec, configs)
        }
    };
    for config in &mut configs {
        if let Some(every) = args.record_every {
            config.record_every = every;
        }
        config.validate().map_err(|e| usage(flag_error(&e)))?;
    }
    let instance = build_instance(&spec)?;
    let x0 = DVector::zeros(instance.dim());
    if args.tune {
        for config in &mut configs {
            let tuned = tune_alpha(&instance, config, &alphas, args.target, &x0).map_err(library_error)?;
            config.alpha = tuned.alpha;
        }
    }
    let traces = convergence_experiment(&instance, &configs, &x0).map_err(library_error)?;
    let summary = summarize(Some(spec), &instance, &configs, &traces, &x0);
    emit_traces(&args.common, &traces, &summary, out)
}

fn sweep_command(args: SweepArgs, out: &mut dyn Write) -> Result<(), Failure> {
    configure_threads(args.common.threads)?;
    let (spec, configs, alphas) = match &args.common.config {
        Some(path) => {
            let file = load_config(path)?;
            let configs = if file.solvers.is_empty() {
                default_sweep(2000, ModelVariant::CuttingPlane, 10, None)
            } else {
                file.solvers
            };
            let alphas = match file.alphas {
                Some(a) => a,
                None => grid(&args.grid)?,
            };
            (file.instance, configs, alphas)
        }
        None => {
            let spec = instance_spec(&args.instance)?;
            let iters = args.iters.unwrap_or(2000);
            let model = args.model.unwrap_or(ModelVariant::CuttingPlane);
            let m = args.m.unwrap_or(10);
            let configs = match &args.algo {
                Some(algos) => algos
                    .iter()
                    .map(|&algorithm| {
                        let mut config = SolverConfig::new(algorithm, iters);
                        if algorithm.uses_bundle() {
                            config.bundle = Some(BundleConfig::new(model, m));
                        }
                        if algorithm.uses_momentum() {
                            config.restart_period = args.restart;
                        }
                        config
                    })
                    .collect(),
                None => default_sweep(iters, model, m, args.restart),
            };
            (spec, configs, grid(&args.grid)?)
        }
    };
    for config in &configs {
        config.validate().map_err(|e| usage(flag_error(&e)))?;
    }
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(usage(format!("--alpha: step multipliers must be positive, got {bad}")));
    }
    let instance = build_instance(&spec)?;
    let x0 = DVector::zeros(instance.dim());
    let records = robustness_sweep(&instance, &configs, &alphas, &x0).map_err(library_error)?;
    let mut buf = Vec::new();
    match args.common.format {
        Format::Csv => write_sweep_csv(&records, &mut buf).context("encoding sweep")?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &records).context("encoding sweep")?;
            buf.push(b'\n');
        }
    }
    match &args.common.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).context("creating the output directory")?;
            let name = match args.common.format {
                Format::Csv => "sweep.csv",
                Format::Json => "sweep.json",
            };
            let path = dir.join(name);
            fs::write(&path, &buf).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "{}", path.display()).context("writing to stdout")?;
        }
        None => out.write_all(&buf).context("writing to stdout")?,
    }
    Ok(())
}

/// AGD and APBM with the given bundle, as in the step-size robustness experiment.
fn default_sweep(iters: usize, model: ModelVariant, m: usize, restart: Option<usize>) -> Vec<SolverConfig> {
    let mut agd = SolverConfig::agd(iters);
    let mut apbm = SolverConfig::apbm(BundleConfig::new(model, m), iters);
    agd.restart_period = restart;
    apbm.restart_period = restart;
    vec![agd, apbm]
}

fn verify_command(args: VerifyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    configure_threads(args.threads)?;
    let report = verify::run_suite(args.quick).context("running the invariant suite")?;
    match args.format {
        Format::Csv => {
            for check in &report.checks {
                writeln!(out, "[{}] {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail)
                    .context("writing to stdout")?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).context("writing report")?;
            writeln!(out).context("writing to stdout")?;
        }
    }
    let failed = report.failures().count();
    if failed > 0 {
        return Err(Failure::VerifyFailed(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Usage(String::new()).exit_code(), 2);
        assert_eq!(Failure::Diverged(String::new()).exit_code(), 1);
        assert_eq!(Failure::Runtime(anyhow!("io")).exit_code(), 1);
        assert_eq!(Failure::VerifyFailed(1).exit_code(), 3);
    }

    #[test]
    fn parser_exit_codes_through_main() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["bundle-accel", "--help"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("verify"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["bundle-accel", "verify", "--quick", "--quick"], &mut out, &mut err), 2);
    }

    #[test]
    fn config_file_validation() {
        let ok = r#"{"instance":{"kind":"least_squares","N":3,"n":2,"seed":0},"solvers":[{"algorithm":"gd","max_iterations":1}]}"#;
        assert_eq!(ConfigFile::from_json(ok).unwrap().solvers.len(), 1);
        let bad_solver = r#"{"instance":{"kind":"least_squares","N":3,"n":2,"seed":0},"solvers":[{"algorithm":"pbm","max_iterations":1}]}"#;
        assert!(ConfigFile::from_json(bad_solver).is_err());
        let bad_instance = r#"{"instance":{"kind":"least_squares","N":0,"n":2,"seed":0}}"#;
        assert!(ConfigFile::from_json(bad_instance).is_err());
    }

    #[test]
    fn flag_errors_name_cli_flags() {
        let e = bundle_accel::Error::InvalidParameter {
            name: "record_every",
            reason: "must be positive".into(),
        };
        assert_eq!(flag_error(&e), "--record-every: must be positive");
    }
}
