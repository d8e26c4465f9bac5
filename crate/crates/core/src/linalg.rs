//! Small dense helpers shared by the problem and subproblem code.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::NormalStream;

/// Outcome of a power iteration on a symmetric positive semidefinite operator.
#[derive(Clone, Debug)]
pub struct PowerIteration {
    pub eigenvalue: f64,
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration for the dominant eigenvalue of a symmetric PSD operator.
///
/// Stops once the Rayleigh quotient changes by at most `tol` relative between
/// consecutive sweeps. `start` defaults to a fixed pseudo-random vector so the
/// result never depends on the caller's data layout.
pub fn power_iteration(
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    dim: usize,
    start: Option<&DVector<f64>>,
    tol: f64,
    max_iterations: usize,
) -> PowerIteration {
    let mut v = match start {
        Some(s) if s.len() == dim && s.norm() > 0.0 => s.clone(),
        _ => DVector::from_vec(NormalStream::new(0x005e_ed0f_9017).normals(dim)),
    };
    let norm = v.norm();
    if norm == 0.0 || dim == 0 {
        return PowerIteration {
            eigenvalue: 0.0,
            vector: v,
            iterations: 0,
            converged: true,
        };
    }
    v /= norm;
    let mut eigenvalue = 0.0;
    for iteration in 1..=max_iterations {
        let w = apply(&v);
        let next = v.dot(&w);
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return PowerIteration {
                eigenvalue: 0.0,
                vector: v,
                iterations: iteration,
                converged: true,
            };
        }
        v = w / w_norm;
        let change = (next - eigenvalue).abs();
        eigenvalue = next;
        if iteration > 1 && change <= tol * eigenvalue.abs() {
            return PowerIteration {
                eigenvalue,
                vector: v,
                iterations: iteration,
                converged: true,
            };
        }
    }
    PowerIteration {
        eigenvalue,
        vector: v,
        iterations: max_iterations,
        converged: false,
    }
}

/// Squared spectral norm of `matrix`, via power iteration on the smaller Gram matrix.
pub fn spectral_norm_squared(matrix: &DMatrix<f64>, tol: f64, max_iterations: usize) -> Result<f64> {
    let (rows, cols) = matrix.shape();
    let result = if cols <= rows {
        power_iteration(|v| matrix.tr_mul(&(matrix * v)), cols, None, tol, max_iterations)
    } else {
        power_iteration(|v| matrix * matrix.tr_mul(v), rows, None, tol, max_iterations)
    };
    if !result.converged {
        return Err(Error::PowerIterationCap {
            tol,
            iterations: max_iterations,
        });
    }
    Ok(result.eigenvalue)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_spectral_norm() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let s = spectral_norm_squared(&m, 1e-12, 10_000).unwrap();
        assert!((s - 9.0).abs() < 1e-9);
    }

    #[test]
    fn wide_matrix_uses_row_gram() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let s = spectral_norm_squared(&m, 1e-12, 10_000).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_zero_norm() {
        let m = DMatrix::<f64>::zeros(3, 2);
        assert_eq!(spectral_norm_squared(&m, 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn reports_cap() {
        // Two nearly equal eigenvalues converge slowly.
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 - 1e-9, 0.5]));
        let mut start = DVector::from_vec(vec![1e-3, 1.0, 1.0]);
        start /= start.norm();
        let r = power_iteration(|v| &m * v, 3, Some(&start), 1e-300, 5);
        assert!(!r.converged);
    }
}
