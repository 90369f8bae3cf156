//! Ciphertext policies as truth tables over key attributes.
//!
//! A policy for `w`-bit attributes is a `2^w`-bit table; `y` is allowed
//! (`R(x, y) = 0`) iff entry `y` is 0.

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Widest attribute a table policy supports.
pub const MAX_ATTR_BITS: usize = 16;

pub fn table_bits(attr_bits: usize) -> usize {
    1usize << attr_bits
}

pub fn check_attr_bits(attr_bits: usize) -> Result<()> {
    if attr_bits == 0 || attr_bits > MAX_ATTR_BITS {
        return Err(Error::InvalidParams(format!(
            "attribute width must be in 1..={MAX_ATTR_BITS}, got {attr_bits}"
        )));
    }
    Ok(())
}

/// `R(x, y) = 0`. Malformed inputs are never allowed.
pub fn allows(table: &Bits, y: &Bits) -> bool {
    if y.len() > MAX_ATTR_BITS || table.len() != table_bits(y.len()) {
        return false;
    }
    !table.get(y.to_u64() as usize)
}

/// Table allowing exactly the listed attributes.
pub fn allow_only(attr_bits: usize, allowed: &[Bits]) -> Bits {
    let mut t = Bits::ones(table_bits(attr_bits));
    for y in allowed {
        t.set(y.to_u64() as usize, false);
    }
    t
}
