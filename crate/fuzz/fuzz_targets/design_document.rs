#![no_main]

use libfuzzer_sys::fuzz_target;
use pooltest::design::{decode, DesignDocument};

fuzz_target!(|data: &[u8]| {
    let Ok(doc) = serde_json::from_slice::<DesignDocument>(data) else {
        return;
    };
    // Guard dimensions so the fuzzer can't allocate unboundedly.
    if doc.t > 1 << 12 || doc.m > 1 << 12 {
        return;
    }
    if let Ok(matrix) = doc.matrix_bits() {
        let outcomes = vec![false; matrix.rows()];
        let _ = decode(&matrix, &outcomes);
    }
});
