#![no_main]

use libfuzzer_sys::fuzz_target;
use rkrlw::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = RunConfig::parse(text) {
        // derived quantities must fail cleanly, never panic
        let _ = cfg.grid();
        let _ = cfg.time_grid();
        assert!(cfg.final_time > 0.0);
        assert!(cfg.params.validate().is_ok());
    }
});
