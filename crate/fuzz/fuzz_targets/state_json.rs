#![no_main]

use crskl::qreg::{states_equal, SparseState};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = SparseState::from_json(s) {
        let json = state.to_json();
        let back = SparseState::from_json(&json).expect("own output parses");
        assert!(states_equal(&state, &back, 1e-9).unwrap());
        assert_eq!(back.to_json(), json);
    }
});
