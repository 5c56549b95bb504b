#![no_main]

use libfuzzer_sys::fuzz_target;
use pooltest::design::parse_outcomes;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(bits) = parse_outcomes(text) {
        assert!(bits.len() <= text.len());
    }
});
