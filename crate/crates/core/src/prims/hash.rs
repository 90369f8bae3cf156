use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// SHA-256 in counter mode over a domain tag and length-prefixed parts,
/// truncated to `out_bits`.
pub fn expand(domain: &str, parts: &[&Bits], out_bits: usize) -> Bits {
    let mut prefix = Sha256::new();
    prefix.update((domain.len() as u64).to_be_bytes());
    prefix.update(domain.as_bytes());
    for p in parts {
        prefix.update((p.len() as u64).to_be_bytes());
        prefix.update(p.to_bytes());
    }
    let mut bytes = Vec::with_capacity(out_bits.div_ceil(8) + 32);
    let mut counter = 0u64;
    while bytes.len() * 8 < out_bits {
        let mut h = prefix.clone();
        h.update(counter.to_be_bytes());
        bytes.extend_from_slice(&h.finalize());
        counter += 1;
    }
    bytes.truncate(out_bits.div_ceil(8));
    if !out_bits.is_multiple_of(8) {
        if let Some(last) = bytes.last_mut() {
            *last &= 0xffu8 << (8 - out_bits % 8);
        }
    }
    Bits::from_bytes(&bytes, out_bits).expect("padding cleared")
}

/// One-way function `{0,1}^λ → {0,1}^{p(λ)}`, a truncated hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Owf {
    input_bits: usize,
    output_bits: usize,
}

impl Owf {
    pub fn new(input_bits: usize, output_bits: usize) -> Self {
        Self {
            input_bits,
            output_bits,
        }
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn eval(&self, s: &Bits) -> Result<Bits> {
        if s.len() != self.input_bits {
            return Err(Error::LengthMismatch {
                expected: self.input_bits,
                actual: s.len(),
            });
        }
        Ok(expand("owf", &[s], self.output_bits))
    }
}

/// Keyed-hash MAC truncated to the key length.
pub fn mac(key: &Bits, domain: &str, parts: &[&Bits]) -> Bits {
    let mut all = Vec::with_capacity(parts.len() + 1);
    all.push(key);
    all.extend_from_slice(parts);
    expand(domain, &all, key.len())
}
