#![no_main]
use libfuzzer_sys::fuzz_target;
use trajmode::ingest::{parse_labels, ParsePolicy};

fuzz_target!(|data: &str| {
    let _ = parse_labels(data, ParsePolicy::Strict);
    if let Ok(parsed) = parse_labels(data, ParsePolicy::Lenient) {
        for l in &parsed.items {
            assert!(l.start <= l.end);
        }
    }
});
