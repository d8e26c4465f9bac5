use bundle_accel::problem::{optimal_value, smoothness_constant};
use bundle_accel::rng::NormalStream;
use bundle_accel::verify::finite_difference_error;
use bundle_accel::*;
use nalgebra::{DMatrix, DVector};

#[test]
fn residual_is_nonnegative_at_random_points() {
    for (samples, dim, seed) in [(30, 10, 1), (50, 50, 2), (20, 40, 3)] {
        let inst = LeastSquares::generate(samples, dim, seed).unwrap();
        let f_star = inst.optimal_value().unwrap();
        let mut rng = NormalStream::new(seed + 100);
        for i in 0..1000 {
            let scale = 10f64.powi(i % 5 - 3);
            let x = DVector::from_vec(rng.normals(dim)) * scale;
            assert!(inst.value(&x) - f_star >= -1e-9 * (1.0 + f_star.abs()));
        }
        let x_star = inst.minimizer().unwrap();
        assert!((inst.value(x_star) - f_star).abs() <= 1e-12 * (1.0 + f_star.abs()));
    }
}

#[test]
fn gradient_matches_central_differences() {
    let inst = LeastSquares::generate(40, 25, 9).unwrap();
    assert!(finite_difference_error(&inst, 20, 4) <= 1e-6);
}

#[test]
fn smoothness_matches_dense_eigensolver() {
    let inst = LeastSquares::generate(50, 50, 7).unwrap();
    let gram = inst.matrix().tr_mul(inst.matrix()) / 50.0;
    let top = gram.symmetric_eigenvalues().max();
    assert!((inst.smoothness() - top).abs() <= 1e-8 * top);
    assert_eq!(smoothness_constant(inst.matrix()).unwrap(), inst.smoothness());
}

#[test]
fn optimum_matches_the_normal_equations() {
    let inst = LeastSquares::generate(100, 100, 42).unwrap();
    let f_star = optimal_value(&inst);
    let e = inst.matrix();
    let x = e.tr_mul(e).cholesky().unwrap().solve(&e.tr_mul(inst.target()));
    assert!((inst.value(&x) - f_star).abs() <= 1e-9, "{} vs {f_star}", inst.value(&x));
}

#[test]
fn long_gradient_descent_run_approaches_the_optimum() {
    // this square instance is too ill-conditioned for GD to get within 1e-6 in
    // 10,000 steps, so check the sublinear guarantee instead
    let inst = LeastSquares::generate(100, 100, 42).unwrap();
    let x0 = DVector::zeros(100);
    let radius_sq = bench::initial_distance_sq(&inst, &x0).unwrap();
    let trace = run(&SolverConfig::gd(10_000).with_record_every(1000), &inst, &x0).unwrap();
    for r in &trace.records[1..] {
        assert!(r.residual >= -1e-9);
        assert!(r.residual <= inst.smoothness() * radius_sq / (2.0 * r.k as f64), "{r:?}");
    }
    assert!(trace.final_residual() < 1e-2 * trace.records[0].residual);
}

#[test]
fn optimum_of_an_overdetermined_system() {
    let inst = LeastSquares::from_parts(DMatrix::from_element(3, 1, 1.0), DVector::from_vec(vec![0.0, 1.0, 2.0])).unwrap();
    assert!((inst.optimal_value().unwrap() - 1.0 / 3.0).abs() < 1e-14);
    // a 1-D grid search lands on the same value
    let grid = (0..=2000).map(|i| inst.value(&DVector::from_element(1, i as f64 / 1000.0))).fold(f64::INFINITY, f64::min);
    assert!((grid - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn instances_are_deterministic_and_seed_sensitive() {
    let a = LeastSquares::generate(12, 7, 5).unwrap();
    let b = InstanceSpec::least_squares(12, 7, 5).build().unwrap();
    let c = LeastSquares::generate(12, 7, 6).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    assert_eq!(a.target(), b.target());
    assert_ne!(a.matrix(), c.matrix());
}

#[test]
fn instance_spec_round_trips_through_json() {
    let spec = InstanceSpec::from_json(r#"{"kind":"least_squares","N":800,"n":800,"seed":1}"#).unwrap();
    assert_eq!(spec, InstanceSpec::least_squares(800, 800, 1));
    assert_eq!(InstanceSpec::from_json(&spec.to_json()).unwrap(), spec);
    for bad in [
        r#"{"kind":"least_squares","N":0,"n":3,"seed":1}"#,
        r#"{"kind":"logistic","N":3,"n":3,"seed":1}"#,
        r#"{"kind":"least_squares","N":3,"seed":1}"#,
        "not json",
    ] {
        assert!(InstanceSpec::from_json(bad).is_err(), "{bad}");
    }
}
