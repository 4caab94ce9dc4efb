#![no_main]

use libfuzzer_sys::fuzz_target;
use ncp::io::{detect_kind, parse_document};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = parse_document(text) else {
        return;
    };
    let _ = detect_kind(&doc);
});
