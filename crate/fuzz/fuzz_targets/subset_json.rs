#![no_main]
use libfuzzer_sys::fuzz_target;
use trajmode::evaluate::ClassSubsetConfig;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = ClassSubsetConfig::from_json(data) {
        for m in ["walk", "car", "taxi", "bus"] {
            let _ = cfg.map_label(m);
        }
    }
});
