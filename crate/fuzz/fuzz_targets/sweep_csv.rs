#![no_main]

use bundle_accel::bench::{read_sweep_csv, write_sweep_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_sweep_csv(data) {
        let mut buf = Vec::new();
        write_sweep_csv(&records, &mut buf).unwrap();
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap().len(), records.len());
    }
});
