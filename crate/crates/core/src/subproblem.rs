//! The proximal bundle subproblem
//!
//! ```text
//! minimize_x  max_i { ⟨a_i, x⟩ + b_i } + ‖x − y‖² / (2γ)
//! ```
//!
//! solved through its dual over the unit simplex,
//!
//! ```text
//! maximize_λ  q(λ) = −(γ/2)‖Aᵀλ‖² + ⟨λ, Ay + b⟩   s.t. λ ≥ 0, 1ᵀλ = 1,
//! ```
//!
//! with the primal point recovered as `x = y − γAᵀλ`. All dual work happens on
//! the `M×M` Gram matrix `AAᵀ`, so the per-iteration cost is independent of `n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::power_iteration;

pub const DEFAULT_DUAL_TOL: f64 = 1e-10;
pub const DEFAULT_DUAL_MAX_ITERATIONS: usize = 50_000;
/// Largest bundle the exhaustive active-set oracle accepts.
pub const ORACLE_MAX_CUTS: usize = 12;

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}`.
///
/// Uses Condat's pivot-based scheme, which runs in expected linear time. The
/// output is renormalized so its entries sum to one up to a single rounding.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    project_simplex_into(v, &mut out)?;
    Ok(out)
}

/// In-place variant of [`project_simplex`]; `out` must have `v.len()` entries.
pub fn project_simplex_into(v: &[f64], out: &mut [f64]) -> Result<()> {
    if v.is_empty() {
        return Err(invalid("v", "cannot project an empty vector onto the simplex"));
    }
    if out.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            actual: out.len(),
        });
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if v.len() == 1 {
        out[0] = 1.0;
        return Ok(());
    }
    if on_simplex(v) {
        out.copy_from_slice(v);
        return Ok(());
    }
    let tau = condat_threshold(v);
    // the support is usually tiny, so renormalization only revisits it
    let mut support = Vec::new();
    for (i, (o, &x)) in out.iter_mut().zip(v).enumerate() {
        let d = x - tau;
        if d > 0.0 {
            *o = d;
            support.push(i);
        } else {
            *o = 0.0;
        }
    }
    renormalize(v, out, &support);
    Ok(())
}

/// Nonnegative with a sum within rounding of one. Such points are returned
/// unchanged, which makes the projection exactly idempotent.
fn on_simplex(v: &[f64]) -> bool {
    let slack = 2.0 * v.len() as f64 * f64::EPSILON;
    v.iter().all(|&x| x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= slack
}

fn condat_threshold(v: &[f64]) -> f64 {
    let mut active: Vec<f64> = Vec::with_capacity(v.len().min(1024));
    let mut parked: Vec<f64> = Vec::new();
    active.push(v[0]);
    let mut rho = v[0] - 1.0;
    for &y in &v[1..] {
        if y > rho {
            rho += (y - rho) / (active.len() + 1) as f64;
            if rho > y - 1.0 {
                active.push(y);
            } else {
                parked.append(&mut active);
                active.push(y);
                rho = y - 1.0;
            }
        }
    }
    for &y in &parked {
        if y > rho {
            active.push(y);
            rho += (y - rho) / active.len() as f64;
        }
    }
    loop {
        let before = active.len();
        let mut i = 0;
        while i < active.len() {
            let y = active[i];
            if y <= rho {
                active.swap_remove(i);
                rho += (rho - y) / active.len() as f64;
            } else {
                i += 1;
            }
        }
        if active.len() == before {
            break;
        }
    }
    rho
}

fn renormalize(v: &[f64], out: &mut [f64], support: &[usize]) {
    let sum: f64 = support.iter().map(|&i| out[i]).sum();
    if sum > 0.0 && sum.is_finite() {
        if sum != 1.0 {
            support.iter().for_each(|&i| out[i] /= sum);
        }
    } else {
        // every coordinate rounded to zero: all mass on the largest entry
        let best = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, &x)| if x > v[best] { i } else { best });
        out.iter_mut().for_each(|o| *o = 0.0);
        out[best] = 1.0;
    }
}

/// Sort-based `O(M log M)` simplex projection, kept as a reference
/// implementation for cross-checking [`project_simplex`].
pub fn project_simplex_sorted(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(invalid("v", "cannot project an empty vector onto the simplex"));
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if v.len() == 1 {
        return Ok(vec![1.0]);
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - tau).max(0.0)).collect();
    let support: Vec<usize> = (0..out.len()).filter(|&i| out[i] > 0.0).collect();
    renormalize(v, &mut out, &support);
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualMethod {
    /// Projected gradient ascent with fixed step `1/L_q`.
    ProjectedGradient,
    /// The accelerated variant with function-value restarts.
    #[default]
    Accelerated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub method: DualMethod,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_DUAL_TOL,
            max_iterations: DEFAULT_DUAL_MAX_ITERATIONS,
            method: DualMethod::default(),
        }
    }
}

impl DualOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct DualResult {
    /// Simplex weights, one per cut.
    pub lambda: Vec<f64>,
    /// Recovered primal point `y − γAᵀλ`.
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Max of the projected-gradient mapping norm and the complementarity gap.
    pub kkt_residual: f64,
    /// False when the iteration cap was reached before the mapping norm fell below `tol`.
    pub converged: bool,
}

impl DualResult {
    /// The cap was hit and the point is not even approximately optimal.
    pub fn is_inexact(&self, tol: f64) -> bool {
        !self.converged && self.kkt_residual > 10.0 * tol
    }
}

/// Precomputed dual data `G = AAᵀ` and `c = Ay + b`.
struct DualData {
    gram: DMatrix<f64>,
    linear: DVector<f64>,
    step: f64,
}

impl DualData {
    fn new(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>, step: f64) -> Self {
        Self {
            gram: a * a.transpose(),
            linear: a * y + b,
            step,
        }
    }

    fn gradient(&self, lambda: &DVector<f64>) -> DVector<f64> {
        &self.linear - (&self.gram * lambda) * self.step
    }

    fn objective(&self, lambda: &DVector<f64>) -> f64 {
        -0.5 * self.step * lambda.dot(&(&self.gram * lambda)) + self.linear.dot(lambda)
    }
}

fn check_qp_shapes(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>, step: f64) -> Result<()> {
    if a.nrows() == 0 {
        return Err(Error::EmptyBundle);
    }
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    if y.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            actual: y.len(),
        });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", format!("must be positive and finite, got {step}")));
    }
    Ok(())
}

/// Solves the dual of the prox-bundle subproblem by projected gradient ascent.
///
/// `warm`, when given, must have one entry per row of `a`; it is re-projected
/// onto the simplex before use.
pub fn dual_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    y: &DVector<f64>,
    step: f64,
    options: &DualOptions,
    warm: Option<&[f64]>,
) -> Result<DualResult> {
    dual_solve_observed(a, b, y, step, options, warm, |_| {})
}

/// [`dual_solve`] that reports every ascent iterate `λ_j` to `observer`,
/// starting with the initial point.
pub fn dual_solve_observed(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    y: &DVector<f64>,
    step: f64,
    options: &DualOptions,
    warm: Option<&[f64]>,
    mut observer: impl FnMut(&[f64]),
) -> Result<DualResult> {
    check_qp_shapes(a, b, y, step)?;
    if !(options.tol > 0.0) {
        return Err(invalid("tol", "dual tolerance must be positive"));
    }
    let m = a.nrows();
    let data = DualData::new(a, b, y, step);

    let mut lambda = match warm {
        Some(w) if w.len() == m => DVector::from_vec(project_simplex(w)?),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: w.len(),
            })
        }
        None => DVector::from_element(m, 1.0 / m as f64),
    };
    observer(lambda.as_slice());

    let top = power_iteration(|v| &data.gram * v, m, None, 1e-10, 500).eigenvalue;
    let curvature = step * top;
    if m == 1 || curvature <= 0.0 {
        // q is linear on the simplex: any maximizer of c is optimal
        let lambda = if m == 1 {
            DVector::from_element(1, 1.0)
        } else {
            let best = data.linear.imax();
            let mut e = DVector::zeros(m);
            e[best] = 1.0;
            e
        };
        observer(lambda.as_slice());
        return Ok(finish(a, y, &data, lambda, 1.0, 0, true));
    }
    let eta = 1.0 / curvature;

    let mut scratch = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    match options.method {
        DualMethod::ProjectedGradient => {
            while iterations < options.max_iterations {
                iterations += 1;
                let next = projected_step(&data, &lambda, eta, &mut scratch)?;
                let mapping = (&next - &lambda).norm() / eta;
                lambda = next;
                observer(lambda.as_slice());
                if mapping <= options.tol {
                    converged = true;
                    break;
                }
            }
        }
        DualMethod::Accelerated => {
            let mut anchor = lambda.clone();
            let mut theta = 1.0f64;
            let mut value = data.objective(&lambda);
            while iterations < options.max_iterations {
                iterations += 1;
                let trial = projected_step(&data, &anchor, eta, &mut scratch)?;
                let (next, mapping) = if data.objective(&trial) < value {
                    // momentum overshot: restart with a plain step from the last iterate
                    theta = 1.0;
                    let plain = projected_step(&data, &lambda, eta, &mut scratch)?;
                    let mapping = (&plain - &lambda).norm() / eta;
                    anchor = plain.clone();
                    (plain, mapping)
                } else {
                    let mapping = (&trial - &anchor).norm() / eta;
                    let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
                    anchor = &trial + (&trial - &lambda) * ((theta - 1.0) / theta_next);
                    theta = theta_next;
                    (trial, mapping)
                };
                value = data.objective(&next);
                lambda = next;
                observer(lambda.as_slice());
                if mapping <= options.tol {
                    converged = true;
                    break;
                }
            }
        }
    }
    Ok(finish(a, y, &data, lambda, eta, iterations, converged))
}

fn projected_step(data: &DualData, from: &DVector<f64>, eta: f64, scratch: &mut [f64]) -> Result<DVector<f64>> {
    let trial = from + data.gradient(from) * eta;
    project_simplex_into(trial.as_slice(), scratch)?;
    Ok(DVector::from_column_slice(scratch))
}

fn finish(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    data: &DualData,
    lambda: DVector<f64>,
    eta: f64,
    iterations: usize,
    converged: bool,
) -> DualResult {
    let x = y - a.tr_mul(&lambda) * data.step;
    let grad = data.gradient(&lambda);
    let kkt_residual = kkt_residual(&lambda, &grad, eta);
    DualResult {
        lambda: lambda.as_slice().to_vec(),
        x,
        iterations,
        kkt_residual,
        converged,
    }
}

fn kkt_residual(lambda: &DVector<f64>, grad: &DVector<f64>, eta: f64) -> f64 {
    let gap = (grad.max() - lambda.dot(grad)).max(0.0);
    let trial = lambda + grad * eta;
    let stationarity = match project_simplex(trial.as_slice()) {
        Ok(p) => (DVector::from_vec(p) - lambda).norm() / eta,
        Err(_) => f64::INFINITY,
    };
    gap.max(stationarity)
}

/// `x = y − γAᵀλ`.
pub fn recover_primal(a: &DMatrix<f64>, lambda: &[f64], y: &DVector<f64>, step: f64) -> Result<DVector<f64>> {
    if lambda.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: lambda.len(),
        });
    }
    if y.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            actual: y.len(),
        });
    }
    Ok(y - a.tr_mul(&DVector::from_column_slice(lambda)) * step)
}

/// Primal subproblem objective `max_i(⟨a_i, x⟩ + b_i) + ‖x − y‖²/(2γ)`.
pub fn primal_objective(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>, step: f64, x: &DVector<f64>) -> f64 {
    (a * x + b).max() + (x - y).norm_squared() / (2.0 * step)
}

/// Dual objective `q(λ)`.
pub fn dual_objective(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>, step: f64, lambda: &[f64]) -> f64 {
    let lambda = DVector::from_column_slice(lambda);
    let at_lambda = a.tr_mul(&lambda);
    -0.5 * step * at_lambda.norm_squared() + lambda.dot(&(a * y + b))
}

/// Exhaustive active-set solver for small bundles.
///
/// Every nonempty support is tried: the stationarity system
/// `γG_SS λ_S + θ1 = c_S, 1ᵀλ_S = 1` is solved, and the candidate is kept when
/// `λ_S ≥ 0` and the maximum cut value at the recovered point is attained on
/// the support. Among survivors the lowest primal objective wins, then the
/// smallest support.
pub fn qp_oracle_small(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>, step: f64) -> Result<DVector<f64>> {
    check_qp_shapes(a, b, y, step)?;
    let m = a.nrows();
    if m > ORACLE_MAX_CUTS {
        return Err(invalid("M", format!("active-set oracle supports at most {ORACLE_MAX_CUTS} cuts, got {m}")));
    }
    let gram = a * a.transpose();
    let linear = a * y + b;
    let scale = 1.0 + linear.amax() + step * gram.amax();

    let mut best: Option<(f64, usize, DVector<f64>)> = None;
    for mask in 1u32..(1u32 << m) {
        let support: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let s = support.len();
        let mut system = DMatrix::zeros(s + 1, s + 1);
        let mut rhs = DVector::zeros(s + 1);
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                system[(r, c)] = step * gram[(i, j)];
            }
            system[(r, s)] = 1.0;
            system[(s, r)] = 1.0;
            rhs[r] = linear[i];
        }
        rhs[s] = 1.0;
        let svd = system.clone().svd(true, true);
        let cutoff = 1e-13 * svd.singular_values.max().max(1.0);
        let Ok(sol) = svd.solve(&rhs, cutoff) else {
            continue;
        };
        if (&system * &sol - &rhs).amax() > 1e-9 * scale {
            continue;
        }
        if support.iter().enumerate().any(|(r, _)| sol[r] < -1e-12) {
            continue;
        }
        let mut lambda = DVector::zeros(m);
        for (r, &i) in support.iter().enumerate() {
            lambda[i] = sol[r].max(0.0);
        }
        let total = lambda.sum();
        if !(total > 0.0) {
            continue;
        }
        lambda /= total;
        let x = y - a.tr_mul(&lambda) * step;
        let values = a * &x + b;
        let top = values.max();
        let slack = 1e-9 * (1.0 + top.abs());
        if support.iter().any(|&i| values[i] < top - slack) {
            continue;
        }
        let objective = top + (&x - y).norm_squared() / (2.0 * step);
        let better = match &best {
            None => true,
            Some((obj, size, _)) => {
                let tie = 1e-14 * (1.0 + obj.abs());
                objective < obj - tie || (objective <= obj + tie && s < *size)
            }
        };
        if better {
            best = Some((objective, s, x));
        }
    }
    best.map(|(_, _, x)| x).ok_or(Error::NoActiveSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NormalStream;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(close(&project_simplex(&[0.6, 0.6]).unwrap(), &[0.5, 0.5], 1e-15));
        assert_eq!(project_simplex(&[-3.0]).unwrap(), vec![1.0]);
        assert_eq!(project_simplex(&[1e300]).unwrap(), vec![1.0]);
        assert!(project_simplex(&[]).is_err());
        assert!(matches!(project_simplex(&[1.0, f64::NAN]), Err(Error::NonFinite { index: 1 })));
        assert!(project_simplex(&[f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn projection_of_huge_values_stays_on_simplex() {
        let p = project_simplex(&[1e17, 1e17 + 64.0, -5.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn projection_matches_sorted_reference() {
        let mut s = NormalStream::new(5);
        for trial in 0..2000 {
            let m = 1 + trial % 20;
            let v: Vec<f64> = (0..m).map(|_| 3.0 * s.next_normal()).collect();
            let fast = project_simplex(&v).unwrap();
            let slow = project_simplex_sorted(&v).unwrap();
            assert!(close(&fast, &slow, 1e-12), "{v:?}");
            assert_eq!(project_simplex(&fast).unwrap(), fast);
        }
    }

    fn two_symmetric_cuts() -> (DMatrix<f64>, DVector<f64>) {
        // cuts of x²/2 at y = ±1: ±x − 1/2
        (DMatrix::from_column_slice(2, 1, &[-1.0, 1.0]), DVector::from_vec(vec![-0.5, -0.5]))
    }

    #[test]
    fn single_cut_is_a_gradient_step() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5]);
        let b = DVector::from_element(1, 4.0);
        let y = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let r = dual_solve(&a, &b, &y, 0.25, &DualOptions::default(), None).unwrap();
        assert_eq!(r.lambda, vec![1.0]);
        assert!(r.converged);
        assert_eq!(r.x, &y - a.row(0).transpose() * 0.25);
        let oracle = qp_oracle_small(&a, &b, &y, 0.25).unwrap();
        assert!((oracle - &r.x).norm() < 1e-14);
    }

    #[test]
    fn symmetric_cuts_split_evenly() {
        let (a, b) = two_symmetric_cuts();
        let y = DVector::zeros(1);
        for method in [DualMethod::ProjectedGradient, DualMethod::Accelerated] {
            let options = DualOptions {
                tol: 1e-12,
                method,
                ..DualOptions::default()
            };
            let r = dual_solve(&a, &b, &y, 1.0, &options, Some(&[0.9, 0.1])).unwrap();
            assert!(close(&r.lambda, &[0.5, 0.5], 1e-10), "{:?}", r.lambda);
            assert!(r.x[0].abs() < 1e-10);
        }
        let x = qp_oracle_small(&a, &b, &y, 1.0).unwrap();
        assert!(x[0].abs() < 1e-14);
    }

    #[test]
    fn zero_slopes_pick_the_largest_intercept() {
        let a = DMatrix::zeros(3, 2);
        let b = DVector::from_vec(vec![0.0, 2.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let r = dual_solve(&a, &b, &y, 1.0, &DualOptions::default(), None).unwrap();
        assert_eq!(r.lambda, vec![0.0, 1.0, 0.0]);
        assert_eq!(r.x, y);
        assert_eq!(recover_primal(&a, &[1.0 / 3.0; 3], &y, 1.0).unwrap(), y);
    }

    #[test]
    fn recover_primal_vertex_and_shapes() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_vec(vec![1.0, 1.0]);
        let x = recover_primal(&a, &[1.0, 0.0], &y, 0.5).unwrap();
        assert_eq!(x, DVector::from_vec(vec![0.5, 0.0]));
        let x = recover_primal(&a, &[0.25, 0.75], &y, 2.0).unwrap();
        // y − 2·(0.25·(1,2) + 0.75·(3,4)) = (1 − 5, 1 − 7)
        assert_eq!(x, DVector::from_vec(vec![-4.0, -6.0]));
        assert!(recover_primal(&a, &[1.0], &y, 1.0).is_err());
        assert!(recover_primal(&a, &[1.0, 0.0], &DVector::zeros(3), 1.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (a, b) = two_symmetric_cuts();
        let y = DVector::zeros(1);
        assert!(dual_solve(&a, &b, &y, 0.0, &DualOptions::default(), None).is_err());
        assert!(dual_solve(&a, &b, &y, 1.0, &DualOptions::with_tol(0.0), None).is_err());
        assert!(dual_solve(&a, &b, &y, 1.0, &DualOptions::default(), Some(&[1.0])).is_err());
        assert!(dual_solve(&a, &DVector::zeros(3), &y, 1.0, &DualOptions::default(), None).is_err());
        let big = DMatrix::zeros(13, 1);
        assert!(qp_oracle_small(&big, &DVector::zeros(13), &y, 1.0).is_err());
    }

    #[test]
    fn capped_solve_is_reported() {
        let mut s = NormalStream::new(8);
        let a = DMatrix::from_fn(5, 4, |_, _| s.next_normal());
        let b = DVector::from_fn(5, |_, _| s.next_normal());
        let y = DVector::zeros(4);
        let options = DualOptions {
            tol: 1e-14,
            max_iterations: 1,
            method: DualMethod::ProjectedGradient,
        };
        let r = dual_solve(&a, &b, &y, 1.0, &options, None).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(!r.converged);
    }

    #[test]
    fn duplicate_cuts_are_harmless() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, 0.0, 0.3]);
        let y = DVector::from_vec(vec![2.0, 2.0]);
        let r = dual_solve(&a, &b, &y, 1.0, &DualOptions::with_tol(1e-12), None).unwrap();
        let x = qp_oracle_small(&a, &b, &y, 1.0).unwrap();
        assert!((r.x - x).norm() < 1e-9);
    }
}
