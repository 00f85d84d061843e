#![no_main]
use libfuzzer_sys::fuzz_target;
use trajmode::ingest::{parse_plt, ParsePolicy};

fuzz_target!(|data: &str| {
    let _ = parse_plt(data, "000", ParsePolicy::Strict);
    if let Ok(parsed) = parse_plt(data, "000", ParsePolicy::Lenient) {
        for p in &parsed.items {
            assert!((-90.0..=90.0).contains(&p.latitude));
            assert!((-180.0..=180.0).contains(&p.longitude));
        }
    }
});
