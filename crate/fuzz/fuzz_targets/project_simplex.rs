#![no_main]

use bundle_accel::subproblem::{project_simplex, project_simplex_sorted};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let v: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    match project_simplex(&v) {
        Ok(p) => {
            assert!(p.iter().all(|&x| x >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            assert_eq!(project_simplex(&p).unwrap(), p);
            let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if scale < 1e12 {
                let reference = project_simplex_sorted(&v).unwrap();
                for (a, b) in p.iter().zip(&reference) {
                    assert!((a - b).abs() <= 1e-9 * scale);
                }
            }
        }
        Err(_) => assert!(v.is_empty() || v.iter().any(|x| !x.is_finite())),
    }
});
