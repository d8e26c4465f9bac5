#![no_main]

use bundle_accel::SolverConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = SolverConfig::from_json(text) {
        config.validate().expect("parsed configs are valid");
        let _ = config.label();
    }
});
