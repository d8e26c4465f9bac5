//! Invariant suite: bound checks, oracle equivalences, reductions and model audits.
//!
//! Each helper returns raw measurements so the acceptance tests can apply their
//! own thresholds; [`run_suite`] bundles them into named pass/fail checks for the
//! `verify` subcommand.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bench::{check_bounds, initial_distance_sq, BoundCheck};
use crate::error::Result;
use crate::models::{CutId, ModelVariant};
use crate::problem::{validate_oracle, LeastSquares, ProblemOracle};
use crate::rng::NormalStream;
use crate::solvers::{momentum_coefficient, run, BundleConfig, Solver, SolverConfig};
use crate::subproblem::{
    dual_objective, dual_solve_observed, project_simplex, project_simplex_sorted, qp_oracle_small, DualOptions,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// The six bundle configurations the rate bounds are checked on.
pub fn bound_variants() -> Vec<BundleConfig> {
    vec![
        BundleConfig::new(ModelVariant::Polyak, 1),
        BundleConfig::cutting_plane(1),
        BundleConfig::cutting_plane(5),
        BundleConfig::cutting_plane(15),
        BundleConfig::new(ModelVariant::PolyakCuttingPlane, 5),
        BundleConfig::new(ModelVariant::TwoCut, 2),
    ]
}

/// Runs APBM at `α = 1` for every variant on `instance` and checks both rate bounds.
pub fn bound_runs(instance: &LeastSquares, iterations: usize) -> Result<Vec<(String, BoundCheck)>> {
    let x0 = DVector::zeros(instance.dim());
    let radius_sq = initial_distance_sq(instance, &x0)?;
    bound_variants()
        .into_iter()
        .map(|bundle| {
            let config = SolverConfig::apbm(bundle, iterations);
            let trace = run(&config, instance, &x0)?;
            Ok((config.label(), check_bounds(&trace, instance.smoothness(), radius_sq)))
        })
        .collect()
}

/// Largest stepwise `‖x_a^k − x_b^k‖` between two solvers over `iterations` steps.
pub fn stepwise_gap(
    a: &SolverConfig,
    b: &SolverConfig,
    oracle: &dyn ProblemOracle,
    x0: &DVector<f64>,
    iterations: usize,
) -> Result<f64> {
    let mut sa = Solver::new(a.clone(), oracle, x0)?;
    let mut sb = Solver::new(b.clone(), oracle, x0)?;
    let mut worst = 0.0f64;
    for _ in 0..iterations {
        sa.step()?;
        sb.step()?;
        let gap = (&sa.state().x - &sb.state().x).norm();
        worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    Ok(worst)
}

/// `(APBM(cp, m=1) vs AGD, PBM(cp, m=1) vs GD)` stepwise gaps at `α = 1`.
pub fn reduction_gaps(instance: &LeastSquares, iterations: usize) -> Result<(f64, f64)> {
    let x0 = DVector::zeros(instance.dim());
    let accelerated = stepwise_gap(
        &SolverConfig::apbm(BundleConfig::cutting_plane(1), iterations),
        &SolverConfig::agd(iterations),
        instance,
        &x0,
        iterations,
    )?;
    let plain = stepwise_gap(
        &SolverConfig::pbm(BundleConfig::cutting_plane(1), iterations),
        &SolverConfig::gd(iterations),
        instance,
        &x0,
        iterations,
    )?;
    Ok((accelerated, plain))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DualAgreement {
    pub instances: usize,
    /// Largest `‖x_dual − x_oracle‖`.
    pub max_dx: f64,
    /// Every returned λ was nonnegative and summed to one within `2M` ulps.
    pub on_simplex: bool,
    /// Dual objective never decreased along the ascent iterates.
    pub monotone: bool,
    pub worst_decrease: f64,
}

/// Random bundle QPs (`M ≤ 5`, `n ≤ 8`) solved by [`dual_solve_observed`] and the active-set oracle.
pub fn dual_agreement(count: usize, tol: f64, seed: u64) -> Result<DualAgreement> {
    let mut rng = NormalStream::new(seed);
    let options = DualOptions::with_tol(tol);
    let mut report = DualAgreement {
        instances: count,
        on_simplex: true,
        monotone: true,
        ..Default::default()
    };
    for _ in 0..count {
        let m = 1 + (rng.uniform() * 5.0) as usize;
        let n = 1 + (rng.uniform() * 8.0) as usize;
        let a = DMatrix::from_vec(m, n, rng.normals(m * n));
        let b = DVector::from_vec(rng.normals(m));
        let y = DVector::from_vec(rng.normals(n));
        let step = 0.05 + 2.0 * rng.uniform();
        let mut values = Vec::new();
        let result = dual_solve_observed(&a, &b, &y, step, &options, None, |lambda| {
            values.push(dual_objective(&a, &b, &y, step, lambda));
        })?;
        for pair in values.windows(2) {
            let drop = pair[0] - pair[1];
            if drop > 1e-12 * (1.0 + pair[0].abs()) {
                report.monotone = false;
            }
            report.worst_decrease = report.worst_decrease.max(drop);
        }
        let sum: f64 = result.lambda.iter().sum();
        if result.lambda.iter().any(|&l| l < 0.0) || (sum - 1.0).abs() > 2.0 * m as f64 * f64::EPSILON {
            report.on_simplex = false;
        }
        let reference = qp_oracle_small(&a, &b, &y, step)?;
        report.max_dx = report.max_dx.max((&result.x - reference).norm());
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ProjectionAgreement {
    pub vectors: usize,
    pub max_diff: f64,
    pub idempotent: bool,
}

/// Condat projection against the sort-based reference on random vectors of length 1..=20.
pub fn projection_agreement(count: usize, seed: u64) -> Result<ProjectionAgreement> {
    let mut rng = NormalStream::new(seed);
    let mut report = ProjectionAgreement {
        vectors: count,
        idempotent: true,
        ..Default::default()
    };
    for _ in 0..count {
        let m = 1 + (rng.uniform() * 20.0) as usize;
        let scale = 10f64.powf(4.0 * rng.uniform() - 2.0);
        let v: Vec<f64> = rng.normals(m).into_iter().map(|x| x * scale).collect();
        let fast = project_simplex(&v)?;
        let slow = project_simplex_sorted(&v)?;
        let diff = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.max_diff = report.max_diff.max(diff);
        if project_simplex(&fast)? != fast {
            report.idempotent = false;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentumCheck {
    pub steps: usize,
    /// Smallest `t_k / ((k+1)/2)`.
    pub min_growth_ratio: f64,
    /// Largest `|t_{k+1}(t_{k+1} − 1) − t_k²| / t_k²`.
    pub max_recurrence_error: f64,
}

pub fn momentum_recurrence(steps: usize) -> MomentumCheck {
    let mut t = 1.0f64;
    let mut min_growth_ratio = f64::INFINITY;
    let mut max_recurrence_error = 0.0f64;
    for k in 0..=steps {
        min_growth_ratio = min_growth_ratio.min(t / ((k as f64 + 1.0) / 2.0));
        let next = momentum_coefficient(t);
        let err = (next * (next - 1.0) - t * t).abs() / (t * t);
        max_recurrence_error = max_recurrence_error.max(err);
        t = next;
    }
    MomentumCheck {
        steps,
        min_growth_ratio,
        max_recurrence_error,
    }
}

/// Violation counts from auditing the bundle after every update of a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ModelAudit {
    pub label: String,
    pub steps: usize,
    pub points: usize,
    pub minorant: usize,
    pub lower_cut: usize,
    pub convexity: usize,
    pub exactness: usize,
    pub exactness_checks: usize,
}

impl ModelAudit {
    pub fn passed(&self) -> bool {
        self.minorant + self.lower_cut + self.convexity + self.exactness == 0
    }

    pub fn violations(&self) -> usize {
        self.minorant + self.lower_cut + self.convexity + self.exactness
    }
}

/// Drives `config` for its full iteration budget and, after each update, samples
/// `points_per_step` random points around the anchor to test the model.
///
/// Checks: model ≤ f (minorant), model ≥ newest cut, midpoint convexity, and
/// model = f at every retained sample point.
pub fn audit_model_run(
    config: &SolverConfig,
    oracle: &dyn ProblemOracle,
    x0: &DVector<f64>,
    points_per_step: usize,
    seed: u64,
) -> Result<ModelAudit> {
    let mut solver = Solver::new(config.clone(), oracle, x0)?;
    let mut rng = NormalStream::new(seed);
    let dim = oracle.dim();
    let mut sample_points: HashMap<u64, DVector<f64>> = HashMap::new();
    let mut audit = ModelAudit {
        label: config.label(),
        ..Default::default()
    };
    for _ in 0..config.max_iterations {
        let info = solver.step()?;
        let Some(bundle) = solver.state().bundle.as_ref() else {
            break;
        };
        audit.steps += 1;
        let ids = bundle.cut_ids();
        let newest = ids
            .iter()
            .filter_map(|id| match id {
                CutId::Serial(s) => Some(*s),
                CutId::Floor => None,
            })
            .max();
        if let Some(newest) = newest {
            sample_points.insert(newest, info.anchor.clone());
        }
        sample_points.retain(|s, _| ids.contains(&CutId::Serial(*s)));

        let radius = (1.0 + info.anchor.norm()) / (dim as f64).sqrt();
        let draw = |rng: &mut NormalStream| {
            let spread = 2.0 * radius * rng.uniform();
            &info.anchor + DVector::from_vec(rng.normals(dim)) * spread
        };
        for _ in 0..points_per_step {
            audit.points += 1;
            let x = draw(&mut rng);
            let z = draw(&mut rng);
            let fx = oracle.value(&x);
            let mx = bundle.eval(&x)?;
            if mx > fx + 1e-9 * (1.0 + fx.abs()) {
                audit.minorant += 1;
            }
            let cut = info.anchor_value + info.anchor_grad.dot(&(&x - &info.anchor));
            if mx < cut - 1e-9 {
                audit.lower_cut += 1;
            }
            let theta = rng.uniform();
            let mid = &x * theta + &z * (1.0 - theta);
            if bundle.eval(&mid)? > theta * mx + (1.0 - theta) * bundle.eval(&z)? + 1e-9 {
                audit.convexity += 1;
            }
        }
        for point in sample_points.values() {
            audit.exactness_checks += 1;
            let f = oracle.value(point);
            if (bundle.eval(point)? - f).abs() > 1e-10 * (1.0 + f.abs()) {
                audit.exactness += 1;
            }
        }
    }
    Ok(audit)
}

/// Largest relative central-difference gradient error at `points` random points.
pub fn finite_difference_error(oracle: &dyn ProblemOracle, points: usize, seed: u64) -> f64 {
    let mut rng = NormalStream::new(seed);
    let dim = oracle.dim();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = DVector::from_vec(rng.normals(dim));
        let (_, grad) = oracle.value_grad(&x);
        let direction = DVector::from_vec(rng.normals(dim)).normalize();
        let h = 1e-5 * (1.0 + x.norm());
        let numeric = (oracle.value(&(&x + &direction * h)) - oracle.value(&(&x - &direction * h))) / (2.0 * h);
        let exact = grad.dot(&direction);
        worst = worst.max((numeric - exact).abs() / (1.0 + exact.abs()));
    }
    worst
}

/// Full invariant suite; `quick` restricts everything to 50×50 instances and short runs.
pub fn run_suite(quick: bool) -> Result<Report> {
    let mut report = Report::default();
    let shapes: &[(usize, usize)] = if quick { &[(50, 50)] } else { &[(50, 50), (100, 100), (200, 100)] };
    let seeds: &[u64] = if quick { &[1] } else { &[1, 2, 3] };
    let iterations = if quick { 500 } else { 2000 };

    for &(samples, dim) in shapes {
        for &seed in seeds {
            let instance = LeastSquares::generate(samples, dim, seed)?;
            let tag = format!("{samples}x{dim}-s{seed}");
            let oracle_ok = validate_oracle(&instance, 100, 3.0, seed).is_ok();
            report.push(format!("oracle-{tag}"), oracle_ok, "Lipschitz and convexity on sampled pairs");
            let fd = finite_difference_error(&instance, 20, seed);
            report.push(format!("gradient-{tag}"), fd <= 1e-6, format!("max relative FD error {fd:.3e}"));
            for (label, check) in bound_runs(&instance, iterations)? {
                report.push(
                    format!("bounds-{tag}-{label}"),
                    check.passed(),
                    format!(
                        "worst ratios {:.4} (k-bound) {:.4} (t-bound) over {} records",
                        check.worst_k_rate_ratio, check.worst_momentum_rate_ratio, check.records_checked
                    ),
                );
            }
        }
    }

    let instance = LeastSquares::generate(if quick { 50 } else { 100 }, if quick { 50 } else { 100 }, 1)?;
    let (accelerated, plain) = reduction_gaps(&instance, 500)?;
    report.push("reduction-apbm-agd", accelerated <= 1e-10, format!("max ‖Δx‖ {accelerated:.3e}"));
    report.push("reduction-pbm-gd", plain <= 1e-10, format!("max ‖Δx‖ {plain:.3e}"));

    let dual = dual_agreement(if quick { 50 } else { 200 }, 1e-12, 11)?;
    report.push(
        "dual-vs-active-set",
        dual.max_dx <= 1e-8 && dual.on_simplex && dual.monotone,
        format!(
            "max ‖Δx‖ {:.3e}, simplex {}, monotone {} over {} QPs",
            dual.max_dx, dual.on_simplex, dual.monotone, dual.instances
        ),
    );

    let projection = projection_agreement(if quick { 1000 } else { 10_000 }, 13)?;
    report.push(
        "projection-vs-sort",
        projection.max_diff <= 1e-12 && projection.idempotent,
        format!("max diff {:.3e}, idempotent {}", projection.max_diff, projection.idempotent),
    );

    let momentum = momentum_recurrence(if quick { 10_000 } else { 1_000_000 });
    report.push(
        "momentum-recurrence",
        momentum.min_growth_ratio >= 1.0 && momentum.max_recurrence_error <= 1e-9,
        format!(
            "min t_k/((k+1)/2) {:.6}, max recurrence error {:.3e}",
            momentum.min_growth_ratio, momentum.max_recurrence_error
        ),
    );

    let small = LeastSquares::generate(50, 50, 5)?;
    let x0 = DVector::zeros(small.dim());
    let (steps, per_step) = if quick { (100, 10) } else { (300, 1000) };
    for bundle in bound_variants() {
        let config = SolverConfig::apbm(bundle, steps);
        let audit = audit_model_run(&config, &small, &x0, per_step, 17)?;
        report.push(
            format!("model-{}", audit.label),
            audit.passed(),
            format!(
                "{} violations ({} minorant, {} lower cut, {} convexity, {} exactness) over {} points",
                audit.violations(),
                audit.minorant,
                audit.lower_cut,
                audit.convexity,
                audit.exactness,
                audit.points
            ),
        );
    }
    Ok(report)
}
