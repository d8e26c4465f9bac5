#![no_main]

use bundle_accel::InstanceSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = InstanceSpec::from_json(text) {
        // accepted specs re-encode to an equal spec
        assert_eq!(InstanceSpec::from_json(&spec.to_json()).unwrap(), spec);
    }
});
