//! Fixed-length bit strings.
//!
//! Bit 0 is the most significant bit of the first word, so the derived
//! ordering of two strings of equal length is lexicographic over their
//! textual `0`/`1` form. Unused tail bits of the last word are always zero.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        b.clear_tail();
        b
    }

    /// Builds from raw MSB-first words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut b = Self { len, words };
        b.clear_tail();
        b
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = Self::zeros(0);
        for bit in iter {
            b.push(bit);
        }
        b
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut b = Self::zeros(len);
        for i in 0..len {
            b.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        b
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut b = Self::zeros(0);
        for c in s.chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid bit character {other:?} in bit string"
                    )))
                }
            }
        }
        Ok(b)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.gen()).collect();
        Self::from_words(len, words)
    }

    /// Packs into big-endian bytes, padding the last byte with zeros.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for w in &self.words {
            out.extend_from_slice(&w.to_be_bytes());
        }
        out.truncate(nbytes);
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() * 8 < len {
            return Err(Error::Parse(format!(
                "{} bytes cannot hold {len} bits",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; words_for(len)];
        for (i, chunk) in bytes.chunks(8).enumerate().take(words.len()) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words[i] = u64::from_be_bytes(buf);
        }
        let b = Self::from_words(len, words);
        // bytes beyond `len` must be zero padding
        if b.to_bytes() != bytes[..len.div_ceil(8)] || bytes.len() > len.div_ceil(8) {
            return Err(Error::Parse("non-zero padding in bit string bytes".into()));
        }
        Ok(b)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("bad hex: {e}")))?;
        Self::from_bytes(&bytes, len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (63 - i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn extend(&mut self, other: &Bits) {
        if self.len.is_multiple_of(64) {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        let off = self.len % 64;
        for &w in &other.words {
            *self.words.last_mut().expect("non-aligned length has a word") |= w >> off;
            self.words.push(w << (64 - off));
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn concat_all<'a, I: IntoIterator<Item = &'a Bits>>(parts: I) -> Bits {
        let mut out = Bits::zeros(0);
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Reads `n <= 64` bits starting at `pos`, right-aligned in the result.
    fn read_u64(&self, pos: usize, n: usize) -> u64 {
        debug_assert!(n <= 64 && pos + n <= self.len);
        if n == 0 {
            return 0;
        }
        let w = pos / 64;
        let off = pos % 64;
        let hi = self.words[w] << off;
        let combined = if off == 0 || w + 1 >= self.words.len() {
            hi
        } else {
            hi | (self.words[w + 1] >> (64 - off))
        };
        combined >> (64 - n)
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(
            start + len <= self.len,
            "slice [{start}, {}) out of range {}",
            start + len,
            self.len
        );
        let mut words = Vec::with_capacity(words_for(len));
        let mut pos = start;
        let mut remaining = len;
        while remaining > 0 {
            let n = remaining.min(64);
            words.push(self.read_u64(pos, n) << (64 - n));
            pos += n;
            remaining -= n;
        }
        Bits { len, words }
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "xor of bit strings with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Bits) -> bool {
        assert_eq!(self.len, other.len, "dot of bit strings with different lengths");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the first set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.leading_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX << (64 - rem);
            }
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "Bits({self})")
        } else {
            write!(f, "Bits[{}]({}…)", self.len, self.slice(0, 64))
        }
    }
}
