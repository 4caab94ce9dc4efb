#![no_main]

use libfuzzer_sys::fuzz_target;
use ncp::io::{parse_state, Resolver};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = parse_state(text, None, &mut Resolver::builtin_only()) {
        let _ = file.into_state(1e-9);
    }
});
