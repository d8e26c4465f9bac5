#![no_main]

use bundle_accel::{Algorithm, ModelVariant, Status};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = text.parse::<ModelVariant>() {
        assert_eq!(model.tag(), text);
    }
    if let Ok(algorithm) = text.parse::<Algorithm>() {
        assert_eq!(algorithm.tag(), text);
    }
    if let Ok(status) = text.parse::<Status>() {
        assert_eq!(status.tag(), text);
    }
});
