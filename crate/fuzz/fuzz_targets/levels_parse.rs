#![no_main]

use libfuzzer_sys::fuzz_target;
use rkrlw::csvio::parse_levels;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(levels) = parse_levels(text) {
        assert!(!levels.is_empty());
        assert!(levels.iter().all(|v| v.is_finite() && *v > 0.0));
        assert!(levels.windows(2).all(|w| w[1] < w[0]));
    }
});
