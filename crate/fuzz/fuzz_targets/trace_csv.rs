#![no_main]

use bundle_accel::trace::{read_trace_csv, write_trace_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_trace_csv(data) {
        let mut buf = Vec::new();
        write_trace_csv(&records, &mut buf).unwrap();
        let again = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(again.len(), records.len());
        assert!(again.iter().zip(&records).all(|(a, b)| a.same_bits(b)));
    }
});
