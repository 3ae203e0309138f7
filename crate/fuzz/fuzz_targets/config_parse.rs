#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // fail-closed config parsing: arbitrary TOML must never panic
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = cracktip_cli::config::RunConfig::from_toml(text);
    }
});
