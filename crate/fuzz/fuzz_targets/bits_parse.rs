#![no_main]

use crskl::Bits;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(b) = Bits::parse(s) {
        assert_eq!(b.len(), s.len());
        assert_eq!(b.to_string(), s);
        let bytes = b.to_bytes();
        assert_eq!(Bits::from_bytes(&bytes, b.len()).unwrap(), b);
    }
});
