//! Accelerated proximal bundle method (APBM) for smooth convex minimization,
//! with gradient descent, accelerated gradient descent and the plain proximal
//! bundle method as baselines.
//!
//! The pieces, bottom-up:
//!
//! * [`problem`]: value/gradient oracles and seeded least-squares instances.
//! * [`models`]: bundle models (Polyak, cutting-plane, Polyak cutting-plane, two-cut).
//! * [`subproblem`]: the prox-bundle step via its simplex-constrained dual.
//! * [`solvers`]: GD, AGD, PBM and APBM with optional fixed restart.
//! * [`bench`]: experiments, rate-bound checks and CSV/JSON output.
//! * [`verify`]: the self-check suite behind `bundle-accel verify`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod linalg;
pub mod models;
pub mod problem;
pub mod rng;
pub mod solvers;
pub mod subproblem;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use models::{Bundle, Cut, ModelVariant};
pub use problem::{InstanceSpec, LeastSquares, ProblemOracle};
pub use solvers::{run, Algorithm, BundleConfig, Solver, SolverConfig};
pub use subproblem::{dual_solve, project_simplex, DualOptions, DualResult};
pub use trace::{Status, Trace, TraceRecord};
