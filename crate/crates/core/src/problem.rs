//! Objective oracles and the least-squares test instances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::rng::NormalStream;

/// Relative tolerance used when estimating `‖E‖²` by power iteration.
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Iteration cap for the spectral-norm power iteration.
pub const SPECTRAL_MAX_ITERATIONS: usize = 10_000;

/// First-order oracle for a convex, `L`-smooth objective on `R^n`.
///
/// Implementations must be immutable after construction; solver sweeps share
/// one oracle across threads.
pub trait ProblemOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// Objective value and gradient at `x`.
    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>);

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.value_grad(x).0
    }

    /// Lipschitz constant of the gradient.
    fn smoothness(&self) -> f64;

    /// Reference optimal value, when known.
    fn optimal_value(&self) -> Option<f64> {
        None
    }

    /// A minimizer, when known. Used for `‖x⁰ − x*‖` in the rate bounds.
    fn minimizer(&self) -> Option<&DVector<f64>> {
        None
    }
}

type ValueGrad = dyn Fn(&DVector<f64>) -> (f64, DVector<f64>) + Send + Sync;

/// Oracle backed by a closure. Handy for small analytic test functions.
pub struct FnOracle {
    dim: usize,
    smoothness: f64,
    optimum: Option<(f64, DVector<f64>)>,
    eval: Box<ValueGrad>,
}

impl FnOracle {
    pub fn new(
        dim: usize,
        smoothness: f64,
        eval: impl Fn(&DVector<f64>) -> (f64, DVector<f64>) + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        if !(smoothness > 0.0 && smoothness.is_finite()) {
            return Err(invalid("smoothness", format!("must be positive and finite, got {smoothness}")));
        }
        Ok(Self {
            dim,
            smoothness,
            optimum: None,
            eval: Box::new(eval),
        })
    }

    pub fn with_optimum(mut self, value: f64, minimizer: DVector<f64>) -> Self {
        self.optimum = Some((value, minimizer));
        self
    }

    /// `f(x) = ½‖x‖²` on `R^dim`, with `L = 1` and optimum `0` at the origin.
    pub fn half_squared_norm(dim: usize) -> Self {
        Self::new(dim, 1.0, |x| (0.5 * x.norm_squared(), x.clone()))
            .expect("valid parameters")
            .with_optimum(0.0, DVector::zeros(dim))
    }
}

impl ProblemOracle for FnOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.eval)(x)
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn optimal_value(&self) -> Option<f64> {
        self.optimum.as_ref().map(|(v, _)| *v)
    }

    fn minimizer(&self) -> Option<&DVector<f64>> {
        self.optimum.as_ref().map(|(_, x)| x)
    }
}

/// Samples random point pairs and checks the oracle's gradient length,
/// Lipschitz-gradient bound and first-order convexity inequality.
pub fn validate_oracle(oracle: &dyn ProblemOracle, pairs: usize, scale: f64, seed: u64) -> Result<()> {
    let n = oracle.dim();
    let lip = oracle.smoothness();
    if !(lip > 0.0) {
        return Err(invalid("smoothness", format!("must be positive, got {lip}")));
    }
    let mut stream = NormalStream::new(seed);
    for _ in 0..pairs {
        let x = DVector::from_vec(stream.normals(n)) * scale;
        let y = DVector::from_vec(stream.normals(n)) * scale;
        let (fx, gx) = oracle.value_grad(&x);
        let (fy, gy) = oracle.value_grad(&y);
        for g in [&gx, &gy] {
            if g.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: g.len(),
                });
            }
        }
        let dist = (&x - &y).norm();
        if (&gx - &gy).norm() > (1.0 + 1e-8) * lip * dist {
            return Err(invalid("smoothness", "sampled gradient difference exceeds L·‖x−y‖"));
        }
        let linear = fx + gx.dot(&(&y - &x));
        if fy < linear - 1e-8 * (1.0 + fx.abs()) {
            return Err(invalid("oracle", "sampled pair violates the convexity inequality"));
        }
    }
    Ok(())
}

/// `f(x) = ‖Ex − w‖² / (2N)` with cached smoothness constant and optimum.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    matrix: DMatrix<f64>,
    target: DVector<f64>,
    seed: u64,
    smoothness: f64,
    optimal_value: f64,
    minimizer: DVector<f64>,
}

impl LeastSquares {
    /// Draws `E` (row-major) and then `w` i.i.d. standard normal from
    /// [`NormalStream`] seeded with `seed`.
    pub fn generate(samples: usize, dim: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        if dim == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let mut stream = NormalStream::new(seed);
        let matrix = DMatrix::from_row_slice(samples, dim, &stream.normals(samples * dim));
        let target = DVector::from_vec(stream.normals(samples));
        Self::with_seed(matrix, target, seed)
    }

    pub fn from_parts(matrix: DMatrix<f64>, target: DVector<f64>) -> Result<Self> {
        Self::with_seed(matrix, target, 0)
    }

    fn with_seed(matrix: DMatrix<f64>, target: DVector<f64>, seed: u64) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(invalid("E", "must be non-empty"));
        }
        if target.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: target.len(),
            });
        }
        if let Some(index) = matrix.iter().chain(target.iter()).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let smoothness = smoothness_constant(&matrix)?;
        if smoothness <= 0.0 {
            return Err(invalid("E", "zero matrix gives a zero smoothness constant"));
        }
        let minimizer = solve_least_squares(&matrix, &target)?;
        let mut instance = Self {
            matrix,
            target,
            seed,
            smoothness,
            optimal_value: 0.0,
            minimizer,
        };
        instance.optimal_value = instance.value(&instance.minimizer);
        Ok(instance)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    pub fn samples(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> InstanceSpec {
        InstanceSpec::LeastSquares {
            samples: self.samples(),
            dim: self.matrix.ncols(),
            seed: self.seed,
        }
    }
}

impl ProblemOracle for LeastSquares {
    fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let scale = 1.0 / self.samples() as f64;
        let residual = &self.matrix * x - &self.target;
        let value = 0.5 * scale * residual.norm_squared();
        let grad = self.matrix.tr_mul(&residual) * scale;
        (value, grad)
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let residual = &self.matrix * x - &self.target;
        0.5 * residual.norm_squared() / self.samples() as f64
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.optimal_value)
    }

    fn minimizer(&self) -> Option<&DVector<f64>> {
        Some(&self.minimizer)
    }
}

/// `‖E‖² / N` for the least-squares objective built on `E`.
pub fn smoothness_constant(matrix: &DMatrix<f64>) -> Result<f64> {
    let norm_sq = linalg::spectral_norm_squared(matrix, SPECTRAL_TOL, SPECTRAL_MAX_ITERATIONS)?;
    Ok(norm_sq / matrix.nrows() as f64)
}

/// Minimum-norm solution of the normal equations `EᵀE x = Eᵀw`, computed
/// through an SVD of `E` with one step of iterative refinement.
pub fn solve_least_squares(matrix: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = matrix.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = 1e-12 * sigma_max.max(f64::MIN_POSITIVE);
    let mut x = svd.solve(target, cutoff).map_err(|e| Error::Factorization(e.to_string()))?;
    let residual = target - matrix * &x;
    let correction = svd.solve(&residual, cutoff).map_err(|e| Error::Factorization(e.to_string()))?;
    x += correction;
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(x)
}

/// `f*` for a least-squares instance (cached at construction).
pub fn optimal_value(instance: &LeastSquares) -> f64 {
    instance.optimal_value
}

/// Serializable description of a problem instance.
///
/// ```json
/// {"kind":"least_squares","N":800,"n":800,"seed":1}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    LeastSquares {
        #[serde(rename = "N")]
        samples: usize,
        #[serde(rename = "n")]
        dim: usize,
        seed: u64,
    },
}

impl InstanceSpec {
    pub fn least_squares(samples: usize, dim: usize, seed: u64) -> Self {
        Self::LeastSquares { samples, dim, seed }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::LeastSquares { samples, dim, .. } => {
                if samples == 0 {
                    return Err(invalid("N", "must be at least 1"));
                }
                if dim == 0 {
                    return Err(invalid("n", "must be at least 1"));
                }
                Ok(())
            }
        }
    }

    pub fn build(&self) -> Result<LeastSquares> {
        self.validate()?;
        match *self {
            Self::LeastSquares { samples, dim, seed } => LeastSquares::generate(samples, dim, seed),
        }
    }
}
