#![no_main]

use crskl::cr2::Cr2Cert;
use libfuzzer_sys::fuzz_target;

// First byte picks the slot count, the next ones the widths of `d_i`.
fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else {
        return;
    };
    let k = (k % 8) as usize;
    if rest.len() < k {
        return;
    }
    let widths: Vec<usize> = rest[..k].iter().map(|&w| w as usize + 1).collect();
    let Ok(s) = std::str::from_utf8(&rest[k..]) else {
        return;
    };
    if let Ok(cert) = Cr2Cert::from_json(s, &widths) {
        let back = Cr2Cert::from_json(&cert.to_json(), &widths).expect("own output parses");
        assert_eq!(back, cert);
    }
});
