use std::fs;

use bundle_accel::bench::*;
use bundle_accel::solvers::{extrapolate, momentum_coefficient};
use bundle_accel::trace::read_trace_csv;
use bundle_accel::*;
use nalgebra::{DMatrix, DVector};

#[test]
fn momentum_examples() {
    let t2 = momentum_coefficient(1.0);
    assert!((t2 - 1.618_033_988_7).abs() < 1e-10);
    let t3 = momentum_coefficient(t2);
    assert!((t3 * (t3 - 1.0) - t2 * t2).abs() <= 1e-12 * t2 * t2);
    let x = DVector::from_vec(vec![2.0]);
    let x_prev = DVector::from_vec(vec![0.0]);
    assert_eq!(extrapolate(&x, &x_prev, 1.0, t2), x);
    assert_eq!(extrapolate(&x, &x, t2, t3), x);
    let y = extrapolate(&x, &x_prev, t2, t3);
    assert!((y[0] - (2.0 + (t2 - 1.0) / t3 * 2.0)).abs() < 1e-15);
}

#[test]
fn scalar_gd_contracts_geometrically() {
    // f(x) = (2x − 2)²/2, L = 4; at α = 1/2 the error halves and the residual quarters
    let inst = LeastSquares::from_parts(DMatrix::from_element(1, 1, 2.0), DVector::from_element(1, 2.0)).unwrap();
    let traces = convergence_experiment(&inst, &[SolverConfig::gd(10).with_alpha(0.5)], &DVector::zeros(1)).unwrap();
    let records = &traces[0].records;
    assert_eq!(records.len(), 11);
    for pair in records.windows(2) {
        assert!((pair[1].residual - pair[0].residual / 4.0).abs() <= 1e-15);
    }
}

#[test]
fn apbm_is_more_step_size_tolerant_than_agd_at_desk_scale() {
    let inst = LeastSquares::generate(200, 200, 3).unwrap();
    let x0 = DVector::zeros(200);
    let configs = [SolverConfig::agd(1000), SolverConfig::apbm(BundleConfig::cutting_plane(10), 1000)];
    let sweep = robustness_sweep(&inst, &configs, &[1.0, 2.0, 4.0], &x0).unwrap();
    assert_eq!(sweep.len(), 6);
    assert_eq!(sweep.iter().map(|r| r.algorithm).collect::<Vec<_>>()[..3], [Algorithm::Agd; 3]);
    assert!(sweep[2].diverged(), "AGD at alpha 4: {:?}", sweep[2]);
    assert!(!sweep[5].diverged(), "APBM at alpha 4: {:?}", sweep[5]);
    assert_eq!(sweep[5].m, Some(10));
}

#[test]
fn gd_makes_more_progress_at_unit_step_than_quarter_step() {
    for seed in [1, 2, 3] {
        let inst = LeastSquares::generate(100, 100, seed).unwrap();
        let sweep = robustness_sweep(&inst, &[SolverConfig::gd(500)], &[0.25, 1.0], &DVector::zeros(100)).unwrap();
        assert!(sweep[1].residual().unwrap() <= sweep[0].residual().unwrap());
    }
}

#[test]
fn sweep_rejects_nonpositive_alpha() {
    let inst = LeastSquares::generate(5, 3, 1).unwrap();
    assert!(robustness_sweep(&inst, &[SolverConfig::gd(5)], &[1.0, 0.0], &DVector::zeros(3)).is_err());
    assert!(alpha_grid(0.0, 1.0, 0.25).is_err());
    assert_eq!(default_alpha_grid().len(), 16);
    assert_eq!(default_alpha_grid().last(), Some(&4.0));
}

#[test]
fn race_writes_round_trippable_outputs() {
    let inst = LeastSquares::generate(100, 100, 4).unwrap();
    let x0 = DVector::zeros(100);
    let configs = default_race(300);
    let started = std::time::Instant::now();
    let traces = convergence_experiment(&inst, &configs, &x0).unwrap();
    assert!(started.elapsed().as_secs() < 30);
    assert_eq!(traces.len(), 4);
    let summary = summarize(Some(inst.spec()), &inst, &configs, &traces, &x0);
    assert!(summary.bounds_hold());
    assert_eq!(summary.runs.iter().filter(|r| r.bound_check.is_some()).count(), 2);

    let dir = tempfile::tempdir().unwrap();
    let written = write_experiment(dir.path(), &traces, &summary).unwrap();
    assert_eq!(written.len(), 6);
    for trace in &traces {
        let back = read_trace_csv(fs::File::open(dir.path().join(format!("{}.csv", trace.label))).unwrap()).unwrap();
        assert_eq!(back.len(), trace.records.len());
        assert!(back.iter().zip(&trace.records).all(|(a, b)| a.same_bits(b)));
    }
    let long = fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    assert!(long.starts_with("label,k,f,residual,grad_norm,elapsed_ms,inner_iters,status\n"));
    assert_eq!(long.lines().count(), 1 + 4 * 301);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["runs"][3]["config"]["algorithm"], "apbm");
    assert_eq!(json["runs"][3]["terminal"]["k"], 300);
    assert_eq!(json["instance"]["N"], 100);
}

#[test]
fn sweep_csv_round_trips_with_sentinel() {
    let records = vec![
        SweepRecord {
            algorithm: Algorithm::Agd,
            m: None,
            alpha: 1.5,
            final_residual: FinalResidual::Diverged,
            status: Status::Diverged,
        },
        SweepRecord {
            algorithm: Algorithm::Apbm,
            m: Some(10),
            alpha: 4.0,
            final_residual: FinalResidual::Value(6.5e-5),
            status: Status::Capped,
        },
    ];
    let mut buf = Vec::new();
    write_sweep_csv(&records, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("algorithm,m,alpha,final_residual,status\n"));
    assert!(text.contains(",diverged,"));
    assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), records);
    assert!(read_sweep_csv("algorithm,m,alpha,final_residual,status\nagd,,1,nope,capped\n".as_bytes()).is_err());
}

#[test]
fn restart_resets_momentum_and_keeps_the_bundle() {
    let inst = LeastSquares::generate(30, 20, 2).unwrap();
    let config = SolverConfig::apbm(BundleConfig::cutting_plane(5), 50);
    let mut solver = Solver::new(config, &inst, &DVector::zeros(20)).unwrap();
    for _ in 0..7 {
        solver.step().unwrap();
    }
    let cuts = solver.state().bundle.as_ref().unwrap().len();
    solver.restart();
    let state = solver.state();
    assert_eq!(state.t, 1.0);
    assert_eq!(state.y, state.x);
    assert_eq!(state.x_prev, state.x);
    assert_eq!(state.bundle.as_ref().unwrap().len(), cuts);

    let restarted = run(&SolverConfig::agd(60).with_restart(20), &inst, &DVector::zeros(20)).unwrap();
    for (r, &t) in restarted.records.iter().zip(&restarted.momentum) {
        if r.k % 20 == 1 {
            assert_eq!(t, 1.0, "k={}", r.k);
        }
    }
}
