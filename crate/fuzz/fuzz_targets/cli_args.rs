#![no_main]

use bundle_accel_cli::Cli;
use clap::Parser;
use libfuzzer_sys::fuzz_target;

// argv is NUL-separated; only parsing is exercised, never execution
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args = std::iter::once("bundle-accel").chain(text.split('\0'));
    let _ = Cli::try_parse_from(args);
});
