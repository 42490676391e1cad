#![no_main]

use hpstmg::harness::{parse_override, RunConfig};
use libfuzzer_sys::fuzz_target;

// One override per line, applied on top of the built-in defaults.
fuzz_target!(|text: &str| {
    let lines: Vec<&str> = text.lines().collect();
    for line in &lines {
        if let Ok((path, _)) = parse_override(line) {
            assert!(!path.is_empty() && path.iter().all(|s| !s.is_empty()));
        }
    }
    let _ = RunConfig::with_overrides("", &lines);
});
