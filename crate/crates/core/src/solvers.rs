//! GD, AGD, PBM and APBM over a [`ProblemOracle`].
//!
//! All four methods use the step `γ = α/L`. The accelerated methods keep the
//! momentum sequence
//!
//! ```text
//! t_{k+1} = (1 + sqrt(1 + 4 t_k²)) / 2,    y^{k+1} = x^k + (t_k − 1)/t_{k+1} · (x^k − x^{k−1}),
//! ```
//!
//! starting from `y¹ = x⁰`, `t₁ = 1`. APBM replaces the gradient step at `y^k`
//! with a proximal step on a bundle model anchored at `y^k`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{Bundle, CutId, ModelVariant, ProxStep};
use crate::problem::ProblemOracle;
use crate::subproblem::{dual_solve, DualMethod, DualOptions};
use crate::trace::{Status, Trace, TraceRecord};

/// Runs whose objective exceeds this multiple of `1 + |f(x⁰)|` are classified as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gd,
    Agd,
    Pbm,
    Apbm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Gd, Algorithm::Agd, Algorithm::Pbm, Algorithm::Apbm];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Gd => "gd",
            Self::Agd => "agd",
            Self::Pbm => "pbm",
            Self::Apbm => "apbm",
        }
    }

    pub fn uses_bundle(self) -> bool {
        matches!(self, Self::Pbm | Self::Apbm)
    }

    pub fn uses_momentum(self) -> bool {
        matches!(self, Self::Agd | Self::Apbm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == s).ok_or_else(|| Error::Parse {
            what: "algorithm",
            reason: format!("unknown algorithm {s:?}; expected one of gd, agd, pbm, apbm"),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub model: ModelVariant,
    pub m: usize,
    /// Lower bound `ℓ_f` for the floor variants. Defaults to the oracle's `f*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

impl BundleConfig {
    pub fn new(model: ModelVariant, m: usize) -> Self {
        Self { model, m, floor: None }
    }

    pub fn cutting_plane(m: usize) -> Self {
        Self::new(ModelVariant::CuttingPlane, m)
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_record_every() -> usize {
    1
}

fn default_dual_tol() -> f64 {
    crate::subproblem::DEFAULT_DUAL_TOL
}

fn default_dual_max_iterations() -> usize {
    crate::subproblem::DEFAULT_DUAL_MAX_ITERATIONS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleConfig>,
    /// Step multiplier; the step is `alpha / L`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_period: Option<usize>,
    #[serde(default = "default_dual_tol")]
    pub dual_tol: f64,
    #[serde(default = "default_dual_max_iterations")]
    pub dual_max_iterations: usize,
    #[serde(default)]
    pub dual_method: DualMethod,
    /// Stop once `‖∇f(x^k)‖` falls to this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, max_iterations: usize) -> Self {
        Self {
            algorithm,
            bundle: None,
            alpha: 1.0,
            max_iterations,
            restart_period: None,
            dual_tol: default_dual_tol(),
            dual_max_iterations: default_dual_max_iterations(),
            dual_method: DualMethod::default(),
            grad_tol: None,
            record_every: 1,
        }
    }

    pub fn gd(max_iterations: usize) -> Self {
        Self::new(Algorithm::Gd, max_iterations)
    }

    pub fn agd(max_iterations: usize) -> Self {
        Self::new(Algorithm::Agd, max_iterations)
    }

    pub fn pbm(bundle: BundleConfig, max_iterations: usize) -> Self {
        Self {
            bundle: Some(bundle),
            ..Self::new(Algorithm::Pbm, max_iterations)
        }
    }

    pub fn apbm(bundle: BundleConfig, max_iterations: usize) -> Self {
        Self {
            bundle: Some(bundle),
            ..Self::new(Algorithm::Apbm, max_iterations)
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_restart(mut self, period: usize) -> Self {
        self.restart_period = Some(period);
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn with_dual_tol(mut self, tol: f64) -> Self {
        self.dual_tol = tol;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = Some(tol);
        self
    }

    pub fn dual_options(&self) -> DualOptions {
        DualOptions {
            tol: self.dual_tol,
            max_iterations: self.dual_max_iterations,
            method: self.dual_method,
        }
    }

    /// Short identifier such as `apbm-cutting-plane-m15`.
    pub fn label(&self) -> String {
        match &self.bundle {
            Some(b) if b.model.uses_capacity() => format!("{}-{}-m{}", self.algorithm, b.model, b.m),
            Some(b) => format!("{}-{}", self.algorithm, b.model),
            None => self.algorithm.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive and finite, got {}", self.alpha)));
        }
        match (self.algorithm.uses_bundle(), &self.bundle) {
            (true, None) => {
                return Err(invalid("bundle", format!("{} requires a bundle model", self.algorithm)));
            }
            (false, Some(_)) => {
                return Err(invalid("bundle", format!("{} does not use a bundle model", self.algorithm)));
            }
            (true, Some(b)) => {
                if b.m < 1 {
                    return Err(invalid("m", "bundle capacity must be at least 1"));
                }
                if b.floor.is_some() && !b.model.uses_floor() {
                    return Err(invalid("floor", format!("the {} model does not use a floor", b.model)));
                }
                if let Some(floor) = b.floor {
                    if !floor.is_finite() {
                        return Err(invalid("floor", "must be finite"));
                    }
                }
            }
            (false, None) => {}
        }
        if let Some(period) = self.restart_period {
            if !self.algorithm.uses_momentum() {
                return Err(invalid("restart", format!("{} has no momentum to restart", self.algorithm)));
            }
            if period == 0 {
                return Err(invalid("restart", "period must be positive"));
            }
        }
        if !(self.dual_tol > 0.0) {
            return Err(invalid("tol", "dual tolerance must be positive"));
        }
        if self.dual_max_iterations == 0 {
            return Err(invalid("dual_max_iterations", "must be positive"));
        }
        if let Some(tol) = self.grad_tol {
            if !(tol > 0.0) {
                return Err(invalid("grad_tol", "must be positive"));
            }
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be positive"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

/// `t_{k+1} = (1 + sqrt(1 + 4 t_k²)) / 2`.
pub fn momentum_coefficient(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// `x + (t − 1)/t_next · (x − x_prev)`.
pub fn extrapolate(x: &DVector<f64>, x_prev: &DVector<f64>, t: f64, t_next: f64) -> DVector<f64> {
    let weight = (t - 1.0) / t_next;
    if weight == 0.0 {
        return x.clone();
    }
    x + (x - x_prev) * weight
}

#[derive(Clone, Debug)]
pub struct SolverState {
    pub k: usize,
    pub x: DVector<f64>,
    pub x_prev: DVector<f64>,
    /// Extrapolated point at which the next model or gradient is built.
    pub y: DVector<f64>,
    pub t: f64,
    /// `t_k` used to produce the current `x^k`.
    pub t_used: f64,
    pub bundle: Option<Bundle>,
    pub oracle_calls: u64,
    pub inner_iterations: u64,
    pub inexact_subproblems: u64,
}

impl SolverState {
    fn new(x0: &DVector<f64>, bundle: Option<Bundle>) -> Self {
        Self {
            k: 0,
            x: x0.clone(),
            x_prev: x0.clone(),
            y: x0.clone(),
            t: 1.0,
            t_used: 1.0,
            bundle,
            oracle_calls: 0,
            inner_iterations: 0,
            inexact_subproblems: 0,
        }
    }

    /// Discards momentum: `t ← 1`, `y ← x`, `x_prev ← x`. Cuts are kept.
    pub fn restart(&mut self) {
        self.t = 1.0;
        self.y = self.x.clone();
        self.x_prev = self.x.clone();
    }
}

/// What one outer iteration produced, for callers that inspect the model.
#[derive(Clone, Debug)]
pub struct StepInfo {
    /// Point whose cut or gradient was used in this step.
    pub anchor: DVector<f64>,
    pub anchor_value: f64,
    pub anchor_grad: DVector<f64>,
    pub inner_iterations: usize,
}

/// A solver run in progress; drive it with [`Solver::step`].
pub struct Solver<'a> {
    config: SolverConfig,
    oracle: &'a dyn ProblemOracle,
    step_size: f64,
    state: SolverState,
    warm: Vec<(CutId, f64)>,
    last_center: Option<DVector<f64>>,
}

impl<'a> Solver<'a> {
    pub fn new(config: SolverConfig, oracle: &'a dyn ProblemOracle, x0: &DVector<f64>) -> Result<Self> {
        config.validate()?;
        if x0.len() != oracle.dim() {
            return Err(Error::DimensionMismatch {
                expected: oracle.dim(),
                actual: x0.len(),
            });
        }
        let bundle = match &config.bundle {
            Some(b) => {
                let floor = if b.model.uses_floor() {
                    let floor = b.floor.or(oracle.optimal_value()).ok_or_else(|| {
                        invalid("floor", format!("the {} model needs a floor and the oracle has no reference optimum", b.model))
                    })?;
                    if let Some(f_star) = oracle.optimal_value() {
                        if floor > f_star + 1e-12 * (1.0 + f_star.abs()) {
                            return Err(invalid(
                                "floor",
                                format!("floor {floor} exceeds the optimal value {f_star}; the model would not be a minorant"),
                            ));
                        }
                    }
                    Some(floor)
                } else {
                    None
                };
                Some(Bundle::new(b.model, b.m, floor)?)
            }
            None => None,
        };
        Ok(Self {
            step_size: config.alpha / oracle.smoothness(),
            config,
            oracle,
            state: SolverState::new(x0, bundle),
            warm: Vec::new(),
            last_center: None,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn restart(&mut self) {
        self.state.restart();
    }

    /// One outer iteration: produces `x^{k+1}` (and `t`, `y` for the momentum methods).
    pub fn step(&mut self) -> Result<StepInfo> {
        let gamma = self.step_size;
        let algorithm = self.config.algorithm;
        let anchor = match algorithm {
            Algorithm::Gd | Algorithm::Pbm => self.state.x.clone(),
            Algorithm::Agd | Algorithm::Apbm => self.state.y.clone(),
        };
        let (value, grad) = self.oracle.value_grad(&anchor);
        self.state.oracle_calls += 1;
        if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite { index });
        }

        let mut inner = 0;
        let next = match algorithm {
            Algorithm::Gd | Algorithm::Agd => &anchor - &grad * gamma,
            Algorithm::Pbm | Algorithm::Apbm => {
                let bundle = self.state.bundle.as_mut().expect("validated bundle");
                let prev = self.last_center.as_ref().map(|center| ProxStep {
                    center,
                    point: &self.state.x,
                    step: gamma,
                });
                bundle.update(&anchor, value, &grad, prev)?;
                let (a, b) = bundle.export_qp()?;
                let ids = bundle.cut_ids();
                let warm: Vec<f64> = ids
                    .iter()
                    .map(|id| self.warm.iter().find(|(w, _)| w == id).map_or(0.0, |(_, l)| *l))
                    .collect();
                let options = self.config.dual_options();
                let result = dual_solve(&a, &b, &anchor, gamma, &options, Some(&warm))?;
                if result.is_inexact(options.tol) {
                    self.state.inexact_subproblems += 1;
                }
                inner = result.iterations;
                self.state.inner_iterations += result.iterations as u64;
                self.warm = ids.into_iter().zip(result.lambda).collect();
                self.last_center = Some(anchor.clone());
                result.x
            }
        };

        let state = &mut self.state;
        state.k += 1;
        state.t_used = state.t;
        if algorithm.uses_momentum() {
            let t_next = momentum_coefficient(state.t);
            state.y = extrapolate(&next, &state.x, state.t, t_next);
            state.t = t_next;
        }
        state.x_prev = std::mem::replace(&mut state.x, next);
        if let Some(bundle) = state.bundle.as_mut() {
            bundle.mark_stale();
        }
        Ok(StepInfo {
            anchor,
            anchor_value: value,
            anchor_grad: grad,
            inner_iterations: inner,
        })
    }
}

/// Runs `config` from `x0`, recording every `record_every` iterations plus the final one.
///
/// Divergence (non-finite iterates or `f(x^k) > 10¹²·(1 + |f(x⁰)|)`) ends the run
/// with a `diverged` terminal record instead of an error.
pub fn run(config: &SolverConfig, oracle: &dyn ProblemOracle, x0: &DVector<f64>) -> Result<Trace> {
    let mut solver = Solver::new(config.clone(), oracle, x0)?;
    let f_star = oracle.optimal_value();
    let residual = |f: f64| f_star.map_or(f64::NAN, |s| f - s);
    let started = Instant::now();
    let elapsed = || started.elapsed().as_secs_f64() * 1e3;

    let (f0, g0) = oracle.value_grad(x0);
    let limit = DIVERGENCE_FACTOR * (1.0 + f0.abs());
    let mut records = vec![TraceRecord {
        k: 0,
        f_value: f0,
        residual: residual(f0),
        grad_norm: g0.norm(),
        elapsed_ms: elapsed(),
        inner_iters: 0,
        status: Status::Running,
    }];
    let mut momentum = vec![1.0];
    let mut status = Status::Capped;
    if !f0.is_finite() {
        status = Status::Diverged;
        records[0].status = status;
    } else if config.grad_tol.is_some_and(|tol| g0.norm() <= tol) {
        status = Status::Converged;
        records[0].status = status;
    }

    while records.last().map(|r| r.status) == Some(Status::Running) && solver.state().k < config.max_iterations {
        let outcome = solver.step();
        let stepped = match outcome {
            Ok(_) => true,
            Err(Error::NonFinite { .. }) => false,
            Err(e) => return Err(e),
        };
        let k = if stepped { solver.state().k } else { solver.state().k + 1 };
        if stepped {
            if let Some(period) = config.restart_period {
                if k % period == 0 {
                    solver.restart();
                }
            }
        }
        let state = solver.state();
        let finite = stepped && state.x.iter().all(|v| v.is_finite());
        let last = k >= config.max_iterations;
        let due = k % config.record_every == 0 || last;
        let mut point_status = Status::Running;
        let (mut f, mut grad_norm) = (f64::NAN, f64::NAN);
        if !finite {
            point_status = Status::Diverged;
            if stepped {
                f = oracle.value(&state.x);
            }
        } else if due || config.grad_tol.is_some() {
            let (fx, gx) = oracle.value_grad(&state.x);
            f = fx;
            grad_norm = gx.norm();
            if !f.is_finite() || f > limit {
                point_status = Status::Diverged;
            } else if config.grad_tol.is_some_and(|tol| grad_norm <= tol) {
                point_status = Status::Converged;
            } else if last {
                point_status = Status::Capped;
            }
        }
        if due || point_status != Status::Running {
            records.push(TraceRecord {
                k,
                f_value: f,
                residual: residual(f),
                grad_norm,
                elapsed_ms: elapsed(),
                inner_iters: state.inner_iterations,
                status: point_status,
            });
            momentum.push(state.t_used);
        }
        if point_status != Status::Running {
            status = point_status;
        }
    }

    let state = solver.state();
    if let Some(last) = records.last_mut() {
        if last.status == Status::Running {
            last.status = status;
        }
    }
    Ok(Trace {
        label: config.label(),
        records,
        momentum,
        final_x: state.x.clone(),
        status,
        oracle_calls: state.oracle_calls,
        inexact_subproblems: state.inexact_subproblems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FnOracle, LeastSquares};

    fn scalar(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn momentum_examples() {
        let golden = momentum_coefficient(1.0);
        assert!((golden - 1.618_033_988_749_895).abs() < 1e-15);
        let mut t = 1.0;
        for _ in 0..100 {
            let next = momentum_coefficient(t);
            assert!((next * (next - 1.0) - t * t).abs() <= 1e-12 * t * t);
            t = next;
        }
    }

    #[test]
    fn extrapolation_examples() {
        let x = scalar(2.0);
        let x_prev = scalar(0.0);
        assert_eq!(extrapolate(&x, &scalar(7.0), 1.0, momentum_coefficient(1.0)), x);
        assert_eq!(extrapolate(&x, &x, 2.5, 3.0), x);
        let t2 = momentum_coefficient(1.0);
        let t3 = momentum_coefficient(t2);
        let y = extrapolate(&x, &x_prev, t2, t3);
        // t2 = (1+√5)/2, t3 = (1+√(1+4 t2²))/2 ≈ 2.1935
        let expected = 2.0 + (0.618_033_988_749_895 / 2.193_527_085_331_054_6) * 2.0;
        assert!((y[0] - expected).abs() < 1e-14, "{} vs {}", y[0], expected);
    }

    #[test]
    fn gd_exact_on_unit_quadratic() {
        let oracle = FnOracle::half_squared_norm(1);
        let trace = run(&SolverConfig::gd(1), &oracle, &scalar(1.0)).unwrap();
        assert_eq!(trace.final_x, scalar(0.0));
        assert_eq!(trace.status, Status::Capped);
        assert_eq!(trace.oracle_calls, 1);
    }

    #[test]
    fn apbm_polyak_first_step() {
        // model max{x − 1/2, 0} at y = 1, step 1: the floor branch is active and
        // the prox point sits at the kink x = 1/2
        let oracle = FnOracle::half_squared_norm(1);
        let config = SolverConfig::apbm(BundleConfig::new(ModelVariant::Polyak, 1).with_floor(0.0), 1).with_dual_tol(1e-14);
        let mut solver = Solver::new(config, &oracle, &scalar(1.0)).unwrap();
        solver.step().unwrap();
        let bundle = solver.state().bundle.as_ref().unwrap();
        let (a, b) = bundle.export_qp().unwrap();
        let expected = crate::subproblem::qp_oracle_small(&a, &b, &scalar(1.0), 1.0).unwrap();
        assert!((solver.state().x[0] - expected[0]).abs() < 1e-10);
        assert!((expected[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::gd(10).validate().is_ok());
        assert!(SolverConfig::gd(10).with_alpha(0.0).validate().is_err());
        assert!(SolverConfig::gd(10).with_alpha(f64::NAN).validate().is_err());
        assert!(SolverConfig::gd(10).with_restart(5).validate().is_err());
        assert!(SolverConfig::agd(10).with_restart(0).validate().is_err());
        assert!(SolverConfig::agd(10).with_restart(5).validate().is_ok());
        assert!(SolverConfig::new(Algorithm::Pbm, 10).validate().is_err());
        let mut gd = SolverConfig::gd(10);
        gd.bundle = Some(BundleConfig::cutting_plane(3));
        assert!(gd.validate().is_err());
        assert!(SolverConfig::apbm(BundleConfig::cutting_plane(0), 10).validate().is_err());
        assert!(SolverConfig::apbm(BundleConfig::cutting_plane(3).with_floor(0.0), 10).validate().is_err());
        assert!(SolverConfig::gd(10).with_record_every(0).validate().is_err());
        assert!(SolverConfig::gd(10).with_dual_tol(0.0).validate().is_err());
    }

    #[test]
    fn config_json() {
        let config = SolverConfig::apbm(BundleConfig::cutting_plane(15), 2000).with_alpha(2.0).with_restart(500);
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(SolverConfig::from_json(&text).unwrap(), config);
        let minimal = SolverConfig::from_json(r#"{"algorithm":"agd","max_iterations":5}"#).unwrap();
        assert_eq!(minimal, SolverConfig::agd(5));
        assert!(SolverConfig::from_json(r#"{"algorithm":"agd","max_iterations":5,"bogus":1}"#).is_err());
        assert!(SolverConfig::from_json(r#"{"algorithm":"pbm","max_iterations":5}"#).is_err());
        assert_eq!(config.label(), "apbm-cutting-plane-m15");
    }

    #[test]
    fn floor_above_optimum_is_rejected() {
        let oracle = FnOracle::half_squared_norm(2);
        let bad = SolverConfig::apbm(BundleConfig::new(ModelVariant::Polyak, 1).with_floor(0.1), 5);
        assert!(Solver::new(bad, &oracle, &DVector::zeros(2)).is_err());
        let defaulted = SolverConfig::apbm(BundleConfig::new(ModelVariant::Polyak, 1), 5);
        let solver = Solver::new(defaulted, &oracle, &DVector::zeros(2)).unwrap();
        assert_eq!(solver.state().bundle.as_ref().unwrap().floor(), Some(0.0));
        let no_optimum = FnOracle::new(1, 1.0, |x| (0.5 * x.norm_squared(), x.clone())).unwrap();
        let polyak = SolverConfig::apbm(BundleConfig::new(ModelVariant::Polyak, 1), 5);
        assert!(Solver::new(polyak, &no_optimum, &scalar(1.0)).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let oracle = FnOracle::half_squared_norm(2);
        assert!(run(&SolverConfig::gd(3), &oracle, &scalar(1.0)).is_err());
    }

    #[test]
    fn divergence_is_reported_not_thrown() {
        let oracle = FnOracle::half_squared_norm(1);
        let trace = run(&SolverConfig::gd(500).with_alpha(3.5), &oracle, &scalar(1.0)).unwrap();
        assert_eq!(trace.status, Status::Diverged);
        assert_eq!(trace.last().status, Status::Diverged);
        assert!(trace.records.len() < 500);
    }

    #[test]
    fn grad_tol_stops_early() {
        let oracle = FnOracle::half_squared_norm(1);
        let trace = run(&SolverConfig::gd(100).with_alpha(0.5).with_grad_tol(1e-3), &oracle, &scalar(1.0)).unwrap();
        assert_eq!(trace.status, Status::Converged);
        // |x_k| = 2^-k
        assert_eq!(trace.last().k, 10);
    }

    #[test]
    fn record_decimation_keeps_final_record() {
        let inst = LeastSquares::generate(10, 5, 3).unwrap();
        let trace = run(&SolverConfig::agd(23).with_record_every(5), &inst, &DVector::zeros(5)).unwrap();
        let ks: Vec<usize> = trace.records.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 5, 10, 15, 20, 23]);
        assert_eq!(trace.momentum.len(), trace.records.len());
        assert_eq!(trace.last().status, Status::Capped);
        assert!(trace.records[..5].iter().all(|r| r.status == Status::Running));
    }

    #[test]
    fn restart_resets_momentum() {
        let inst = LeastSquares::generate(10, 5, 3).unwrap();
        let config = SolverConfig::apbm(BundleConfig::cutting_plane(3), 10).with_restart(4);
        let trace = run(&config, &inst, &DVector::zeros(5)).unwrap();
        // t_5 and t_9 follow restarts after k = 4 and k = 8
        assert_eq!(trace.momentum[5], 1.0);
        assert_eq!(trace.momentum[9], 1.0);
        assert!(trace.momentum[4] > 1.0);

        let mut solver = Solver::new(config, &inst, &DVector::zeros(5)).unwrap();
        for _ in 0..3 {
            solver.step().unwrap();
        }
        let cuts_before = solver.state().bundle.as_ref().unwrap().len();
        solver.restart();
        let state = solver.state();
        assert_eq!(state.t, 1.0);
        assert_eq!(state.y, state.x);
        assert_eq!(state.x_prev, state.x);
        assert_eq!(state.bundle.as_ref().unwrap().len(), cuts_before);
        assert_eq!(extrapolate(&state.x, &state.x_prev, state.t, momentum_coefficient(state.t)), state.x);
    }

    #[test]
    fn gd_is_monotone_on_least_squares() {
        let inst = LeastSquares::generate(100, 100, 42).unwrap();
        let trace = run(&SolverConfig::gd(2000), &inst, &DVector::zeros(100)).unwrap();
        for pair in trace.records.windows(2) {
            assert!(pair[1].f_value <= pair[0].f_value);
        }
    }

    #[test]
    fn newest_cut_tracks_anchor() {
        let inst = LeastSquares::generate(12, 6, 5).unwrap();
        for model in [ModelVariant::CuttingPlane, ModelVariant::TwoCut] {
            let config = SolverConfig::apbm(BundleConfig::new(model, 4), 10);
            let mut solver = Solver::new(config, &inst, &DVector::zeros(6)).unwrap();
            for _ in 0..10 {
                let info = solver.step().unwrap();
                let bundle = solver.state().bundle.as_ref().unwrap();
                let newest = bundle.cuts().filter(|(id, _)| *id != CutId::Floor).last().unwrap().1;
                assert!((newest.eval(&info.anchor) - info.anchor_value).abs() <= 1e-12 * (1.0 + info.anchor_value.abs()));
                assert!(bundle.len() <= 4);
            }
        }
    }
}
