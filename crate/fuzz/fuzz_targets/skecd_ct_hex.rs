#![no_main]

use crskl::skecd::{SkecdCiphertext, SkecdParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else {
        return;
    };
    let params = SkecdParams {
        lambda: 8 + (sel & 7) as usize,
        n: 1 + (sel >> 3 & 7) as usize,
        h: 0,
        msg_bits: 1 + (sel >> 6) as usize,
    };
    let Ok(s) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(bits) = SkecdCiphertext::parse_classical(s, params) {
        assert_eq!(bits.len(), params.classical_bits());
        assert_eq!(bits.to_hex(), s.to_ascii_lowercase());
    }
});
