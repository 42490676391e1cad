#![no_main]

use hpstmg::harness::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(config) = RunConfig::from_toml_str(text) {
        // anything accepted must also pass validation on its own
        assert!(config.validate().is_ok());
    }
});
