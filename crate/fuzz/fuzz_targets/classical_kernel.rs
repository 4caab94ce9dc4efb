#![no_main]

use libfuzzer_sys::fuzz_target;
use ncp::io::parse_classical_kernel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_classical_kernel(text);
});
