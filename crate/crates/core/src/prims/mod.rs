//! Classical building blocks and ideal backends.

pub mod abe;
pub mod cc;
pub mod hash;
pub mod miabe;
pub mod skfe;
pub mod ske;

pub use cc::{CcHandle, CcParams, CcRegistry};
pub use hash::{expand, mac, Owf};
pub use ske::SkeKey;

use crate::bits::Bits;

/// Width of a MSG register holding `msg_bits` of payload or ⊥.
pub fn bottom_width(msg_bits: usize) -> usize {
    msg_bits + 1
}

/// `1 ∥ m` for a message, `0 ∥ 0…0` for ⊥.
pub fn encode_bottom(m: Option<&Bits>, msg_bits: usize) -> Bits {
    match m {
        Some(m) => {
            debug_assert_eq!(m.len(), msg_bits);
            Bits::from_u64(1, 1).concat(m)
        }
        None => Bits::zeros(msg_bits + 1),
    }
}

pub fn decode_bottom(b: &Bits) -> Option<Bits> {
    if b.is_empty() || !b.get(0) {
        None
    } else {
        Some(b.slice(1, b.len() - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_encoding_round_trip() {
        let m = Bits::parse("0000").unwrap();
        let enc = encode_bottom(Some(&m), 4);
        assert_eq!(enc.to_string(), "10000");
        assert_eq!(decode_bottom(&enc), Some(m));
        assert_eq!(decode_bottom(&encode_bottom(None, 4)), None);
    }
}
