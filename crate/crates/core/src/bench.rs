//! Least-squares experiments: convergence race, step-size sweep, restart
//! comparison, and the runtime check of the `O(1/k²)` rate bounds.
//!
//! Sweep CSV columns: `algorithm,m,alpha,final_residual,status`. A diverged
//! cell carries the literal `diverged` in `final_residual`; `m` is empty for
//! methods without a bundle.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::ModelVariant;
use crate::problem::{InstanceSpec, ProblemOracle};
use crate::solvers::{run, Algorithm, BundleConfig, SolverConfig};
use crate::trace::{fmt_float, parse_float, write_trace_csv, Status, Trace, TraceRecord};

pub const SWEEP_HEADER: [&str; 5] = ["algorithm", "m", "alpha", "final_residual", "status"];
/// Residuals below this are clamped in log-scale summaries.
pub const PLOT_FLOOR: f64 = 1e-16;
/// Relative slack applied to both rate bounds.
pub const BOUND_REL_SLACK: f64 = 1e-6;
/// Absolute slack applied to both rate bounds.
pub const BOUND_ABS_SLACK: f64 = 1e-9;

/// `2·L·R²/(k+1)²`, the iteration-count form of the rate bound.
pub fn theoretical_bound(k: usize, smoothness: f64, radius_sq: f64) -> f64 {
    let denom = (k as f64 + 1.0).powi(2);
    2.0 * smoothness * radius_sq / denom
}

/// `L·R²/(2·t_k²)`, the momentum-coefficient form of the rate bound.
pub fn momentum_bound(t: f64, smoothness: f64, radius_sq: f64) -> f64 {
    smoothness * radius_sq / (2.0 * t * t)
}

/// `max(residual, 1e-16)` for log-scale output; CSVs keep raw values.
pub fn plot_residual(residual: f64) -> f64 {
    if residual.is_nan() {
        residual
    } else {
        residual.max(PLOT_FLOOR)
    }
}

/// `‖x⁰ − x*‖²` for an oracle that knows a minimizer.
pub fn initial_distance_sq(oracle: &dyn ProblemOracle, x0: &DVector<f64>) -> Result<f64> {
    let x_star = oracle
        .minimizer()
        .ok_or_else(|| invalid("oracle", "rate bounds need a known minimizer"))?;
    Ok((x0 - x_star).norm_squared())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub records_checked: usize,
    pub k_rate_passed: bool,
    pub momentum_rate_passed: bool,
    /// Largest observed `residual / bound` over the checked records.
    pub worst_k_rate_ratio: f64,
    pub worst_momentum_rate_ratio: f64,
    /// First `k` at which either bound failed.
    pub first_violation: Option<usize>,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.k_rate_passed && self.momentum_rate_passed
    }
}

/// Checks every record of `trace` against both rate bounds with the fixed
/// slack `(1 + 1e-6)·bound + 1e-9`. The momentum form is checked for `k ≥ 1`.
pub fn check_bounds(trace: &Trace, smoothness: f64, radius_sq: f64) -> BoundCheck {
    let mut check = BoundCheck {
        records_checked: 0,
        k_rate_passed: true,
        momentum_rate_passed: true,
        worst_k_rate_ratio: 0.0,
        worst_momentum_rate_ratio: 0.0,
        first_violation: None,
    };
    for (record, &t) in trace.records.iter().zip(&trace.momentum) {
        check.records_checked += 1;
        let residual = record.residual;
        let k_rate = theoretical_bound(record.k, smoothness, radius_sq);
        let ok = residual <= k_rate * (1.0 + BOUND_REL_SLACK) + BOUND_ABS_SLACK;
        check.worst_k_rate_ratio = check.worst_k_rate_ratio.max(residual / k_rate);
        if !ok {
            check.k_rate_passed = false;
            check.first_violation.get_or_insert(record.k);
        }
        if record.k >= 1 {
            let bound = momentum_bound(t, smoothness, radius_sq);
            let ok = residual <= bound * (1.0 + BOUND_REL_SLACK) + BOUND_ABS_SLACK;
            check.worst_momentum_rate_ratio = check.worst_momentum_rate_ratio.max(residual / bound);
            if !ok {
                check.momentum_rate_passed = false;
                check.first_violation.get_or_insert(record.k);
            }
        }
    }
    check
}

/// GD, PBM (m = 15), AGD and APBM (m = 15), each at step multiplier 1.
pub fn default_race(iterations: usize) -> Vec<SolverConfig> {
    vec![
        SolverConfig::gd(iterations),
        SolverConfig::pbm(BundleConfig::cutting_plane(15), iterations),
        SolverConfig::agd(iterations),
        SolverConfig::apbm(BundleConfig::cutting_plane(15), iterations),
    ]
}

/// Runs every config from the same `x0` on the same oracle, in parallel.
pub fn convergence_experiment(
    oracle: &dyn ProblemOracle,
    configs: &[SolverConfig],
    x0: &DVector<f64>,
) -> Result<Vec<Trace>> {
    configs.par_iter().map(|config| run(config, oracle, x0)).collect()
}

/// `min, min + step, …` up to `max` inclusive (with a small tolerance for rounding).
pub fn alpha_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && min.is_finite()) {
        return Err(invalid("alpha-min", format!("step multipliers must be positive, got {min}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("alpha-step", format!("must be positive, got {step}")));
    }
    if !(max >= min && max.is_finite()) {
        return Err(invalid("alpha-max", format!("must be at least alpha-min, got {max}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| min + i as f64 * step).collect())
}

/// Default sweep grid `0.25, 0.5, …, 4.0`.
pub fn default_alpha_grid() -> Vec<f64> {
    alpha_grid(0.25, 4.0, 0.25).expect("static grid is valid")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FinalResidual {
    Value(f64),
    Diverged,
}

impl fmt::Display for FinalResidual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Value(v) => f.write_str(&fmt_float(*v)),
            Self::Diverged => f.write_str("diverged"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub algorithm: Algorithm,
    pub m: Option<usize>,
    pub alpha: f64,
    pub final_residual: FinalResidual,
    pub status: Status,
}

impl SweepRecord {
    pub fn diverged(&self) -> bool {
        self.final_residual == FinalResidual::Diverged
    }

    pub fn residual(&self) -> Option<f64> {
        match self.final_residual {
            FinalResidual::Value(v) => Some(v),
            FinalResidual::Diverged => None,
        }
    }
}

/// Runs each `(config, alpha)` cell for `config.max_iterations` and keeps the
/// terminal residual. Cells run in parallel; output order is config-major,
/// then alpha in grid order.
pub fn robustness_sweep(
    oracle: &dyn ProblemOracle,
    configs: &[SolverConfig],
    alphas: &[f64],
    x0: &DVector<f64>,
) -> Result<Vec<SweepRecord>> {
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(invalid("alpha", format!("step multipliers must be positive, got {bad}")));
    }
    let cells: Vec<(usize, f64)> = (0..configs.len())
        .flat_map(|c| alphas.iter().map(move |&a| (c, a)))
        .collect();
    cells
        .par_iter()
        .map(|&(c, alpha)| {
            let config = configs[c].clone().with_alpha(alpha);
            let trace = run(&config, oracle, x0)?;
            let residual = trace.final_residual();
            let final_residual = if trace.diverged() || !residual.is_finite() {
                FinalResidual::Diverged
            } else {
                FinalResidual::Value(residual)
            };
            Ok(SweepRecord {
                algorithm: config.algorithm,
                m: config.bundle.as_ref().map(|b| b.m),
                alpha,
                final_residual,
                status: trace.status,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedAlpha {
    pub alpha: f64,
    /// Iterations to reach the target residual, if it was reached.
    pub iterations: Option<usize>,
    pub final_residual: f64,
}

/// Coarse grid search for the step multiplier: the fastest `alpha` to reach
/// `target`, or the one with the smallest final residual if none reaches it.
/// Ties go to the smaller `alpha`.
pub fn tune_alpha(
    oracle: &dyn ProblemOracle,
    config: &SolverConfig,
    grid: &[f64],
    target: f64,
    x0: &DVector<f64>,
) -> Result<TunedAlpha> {
    let results: Vec<TunedAlpha> = grid
        .par_iter()
        .map(|&alpha| {
            let trace = run(&config.clone().with_alpha(alpha), oracle, x0)?;
            let final_residual = if trace.diverged() {
                f64::INFINITY
            } else {
                trace.final_residual()
            };
            Ok(TunedAlpha {
                alpha,
                iterations: if trace.diverged() { None } else { trace.iterations_to_reach(target) },
                final_residual,
            })
        })
        .collect::<Result<_>>()?;
    let best = results
        .iter()
        .filter(|r| r.iterations.is_some())
        .min_by_key(|r| r.iterations)
        .or_else(|| {
            results
                .iter()
                .filter(|r| r.final_residual.is_finite())
                .min_by(|a, b| a.final_residual.total_cmp(&b.final_residual))
        })
        .ok_or_else(|| invalid("alpha", "every grid point diverged"))?;
    Ok(best.clone())
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(SWEEP_HEADER)?;
    for r in records {
        out.write_record([
            r.algorithm.tag().to_string(),
            r.m.map_or(String::new(), |m| m.to_string()),
            r.alpha.to_string(),
            r.final_residual.to_string(),
            r.status.tag().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = input.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::Parse {
            what: "sweep header",
            reason: format!("expected {}", SWEEP_HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for row in input.records() {
        let row = row?;
        if row.len() != SWEEP_HEADER.len() {
            return Err(Error::Parse {
                what: "sweep row",
                reason: format!("expected {} fields, got {}", SWEEP_HEADER.len(), row.len()),
            });
        }
        let m = match row[1].trim() {
            "" => None,
            text => Some(text.parse::<usize>().map_err(|e| Error::Parse {
                what: "m",
                reason: format!("{text:?}: {e}"),
            })?),
        };
        let final_residual = match row[3].trim() {
            "diverged" => FinalResidual::Diverged,
            text => FinalResidual::Value(parse_float("final_residual", text)?),
        };
        records.push(SweepRecord {
            algorithm: row[0].trim().parse()?,
            m,
            alpha: parse_float("alpha", &row[2])?,
            final_residual,
            status: row[4].trim().parse()?,
        });
    }
    Ok(records)
}

/// Terminal record of one run, as echoed in summary JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub config: SolverConfig,
    pub terminal: TraceRecord,
    pub log10_residual: f64,
    pub oracle_calls: u64,
    pub inexact_subproblems: u64,
    /// Present when the run satisfies the bound hypotheses (APBM or AGD at alpha = 1, no restart).
    pub bound_check: Option<BoundCheck>,
    pub bound_note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub instance: Option<InstanceSpec>,
    pub smoothness: f64,
    pub optimal_value: Option<f64>,
    pub runs: Vec<RunSummary>,
}

impl ExperimentSummary {
    pub fn bounds_hold(&self) -> bool {
        self.runs
            .iter()
            .filter_map(|r| r.bound_check.as_ref())
            .all(BoundCheck::passed)
    }
}

/// Whether the rate bounds apply to `config` (momentum method, `alpha = 1`, no restart).
pub fn bounds_apply(config: &SolverConfig) -> bool {
    config.algorithm.uses_momentum() && config.alpha == 1.0 && config.restart_period.is_none()
}

pub fn summarize(
    instance: Option<InstanceSpec>,
    oracle: &dyn ProblemOracle,
    configs: &[SolverConfig],
    traces: &[Trace],
    x0: &DVector<f64>,
) -> ExperimentSummary {
    let radius_sq = initial_distance_sq(oracle, x0).ok();
    let runs = configs
        .iter()
        .zip(traces)
        .map(|(config, trace)| {
            let (bound_check, bound_note) = match radius_sq {
                Some(r2) if bounds_apply(config) => (Some(check_bounds(trace, oracle.smoothness(), r2)), None),
                Some(_) => (None, Some("bound check skipped: requires a momentum method at alpha = 1 without restart".into())),
                None => (None, Some("bound check skipped: oracle has no known minimizer".into())),
            };
            let terminal = trace.last().clone();
            RunSummary {
                label: trace.label.clone(),
                config: config.clone(),
                log10_residual: plot_residual(terminal.residual).log10(),
                terminal,
                oracle_calls: trace.oracle_calls,
                inexact_subproblems: trace.inexact_subproblems,
                bound_check,
                bound_note,
            }
        })
        .collect();
    ExperimentSummary {
        instance,
        smoothness: oracle.smoothness(),
        optimal_value: oracle.optimal_value(),
        runs,
    }
}

/// Writes `<label>.csv` per trace, a combined long-format `traces.csv`, and
/// `summary.json` into `dir`. Returns the written paths.
pub fn write_experiment(dir: &Path, traces: &[Trace], summary: &ExperimentSummary) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for trace in traces {
        let path = dir.join(format!("{}.csv", trace.label));
        write_trace_csv(&trace.records, fs::File::create(&path)?)?;
        written.push(path);
    }
    let combined = dir.join("traces.csv");
    write_long_csv(traces, fs::File::create(&combined)?)?;
    written.push(combined);
    let json = dir.join("summary.json");
    fs::write(&json, serde_json::to_string_pretty(summary)?)?;
    written.push(json);
    Ok(written)
}

/// Long format: a leading `label` column followed by the trace columns.
pub fn write_long_csv<W: Write>(traces: &[Trace], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["label"];
    header.extend(crate::trace::TRACE_HEADER);
    out.write_record(&header)?;
    for trace in traces {
        for r in &trace.records {
            out.write_record([
                trace.label.clone(),
                r.k.to_string(),
                fmt_float(r.f_value),
                fmt_float(r.residual),
                fmt_float(r.grad_norm),
                fmt_float(r.elapsed_ms),
                r.inner_iters.to_string(),
                r.status.tag().to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Configs for the restart comparison: AGD and APBM (cutting plane, `m`), each
/// with and without a fixed restart every `period` iterations.
pub fn restart_configs(m: usize, period: usize, iterations: usize) -> Vec<SolverConfig> {
    let apbm = SolverConfig::apbm(BundleConfig::new(ModelVariant::CuttingPlane, m), iterations);
    let agd = SolverConfig::agd(iterations);
    vec![
        agd.clone(),
        agd.with_restart(period),
        apbm.clone(),
        apbm.with_restart(period),
    ]
}
