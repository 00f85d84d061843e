#![no_main]
use libfuzzer_sys::fuzz_target;
use trajmode::ingest::{parse_archive_line, write_archive};

fuzz_target!(|data: &str| {
    if let Ok(sample) = parse_archive_line(data, 1) {
        let mut buf = Vec::new();
        write_archive(std::slice::from_ref(&sample), &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(parse_archive_line(line.trim_end(), 1).unwrap(), sample);
    }
});
