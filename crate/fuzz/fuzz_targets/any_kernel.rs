#![no_main]

use libfuzzer_sys::fuzz_target;
use ncp::io::{parse_any_kernel, Resolver};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_any_kernel(text, None, &mut Resolver::builtin_only(), 1e-9);
});
