#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = pooltest::parse_edge_list(text) {
        // Accepted input must round-trip through the serializer.
        let again = pooltest::parse_edge_list(&g.to_edge_list()).expect("round trip parses");
        assert_eq!(g, again);
    }
});
