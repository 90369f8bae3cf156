use std::collections::HashMap;

use crate::bits::{words_for, Bits};
use crate::error::{Error, Result};

/// A named slice of the register. Each segment starts on a word boundary
/// inside the packed basis key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    name: String,
    width: usize,
    word_offset: usize,
}

impl Segment {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub(crate) fn words(&self) -> usize {
        words_for(self.width)
    }

    pub(crate) fn word_range(&self) -> std::ops::Range<usize> {
        self.word_offset..self.word_offset + self.words()
    }
}

/// Ordered list of named segments.
#[derive(Clone, Debug)]
pub struct RegisterLayout {
    segments: Vec<Segment>,
    index: HashMap<String, usize>,
    total_bits: usize,
    key_words: usize,
}

impl PartialEq for RegisterLayout {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments
    }
}

impl Eq for RegisterLayout {}

impl RegisterLayout {
    pub fn new<S, I>(segments: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, usize)>,
    {
        let mut layout = Self {
            segments: Vec::new(),
            index: HashMap::new(),
            total_bits: 0,
            key_words: 0,
        };
        for (name, width) in segments {
            layout.push(name.into(), width)?;
        }
        Ok(layout)
    }

    pub(crate) fn push(&mut self, name: String, width: usize) -> Result<()> {
        if width == 0 {
            return Err(Error::InvalidLayout(format!("segment `{name}` has width 0")));
        }
        if name.is_empty() {
            return Err(Error::InvalidLayout("empty segment name".into()));
        }
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateSegment(name));
        }
        let total_bits = self
            .total_bits
            .checked_add(width)
            .ok_or_else(|| Error::InvalidLayout("total width overflows".into()))?;
        let seg = Segment {
            name: name.clone(),
            width,
            word_offset: self.key_words,
        };
        self.key_words += seg.words();
        self.total_bits = total_bits;
        self.index.insert(name, self.segments.len());
        self.segments.push(seg);
        Ok(())
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSegment(name.to_string()))
    }

    pub fn width_of(&self, name: &str) -> Result<usize> {
        Ok(self.segments[self.index_of(name)?].width)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub(crate) fn key_words(&self) -> usize {
        self.key_words
    }

    pub(crate) fn segment(&self, idx: usize) -> &Segment {
        &self.segments[idx]
    }

    /// Packs a logical bit string into the padded key form.
    pub(crate) fn pack(&self, bits: &Bits) -> Result<Box<[u64]>> {
        if bits.len() != self.total_bits {
            return Err(Error::LengthMismatch {
                expected: self.total_bits,
                actual: bits.len(),
            });
        }
        let mut key = vec![0u64; self.key_words].into_boxed_slice();
        let mut pos = 0;
        for (i, seg) in self.segments.iter().enumerate() {
            self.write(&mut key, i, &bits.slice(pos, seg.width));
            pos += seg.width;
        }
        Ok(key)
    }

    pub(crate) fn unpack(&self, key: &[u64]) -> Bits {
        let mut out = Bits::zeros(0);
        for i in 0..self.segments.len() {
            out.extend(&self.read(key, i));
        }
        out
    }

    #[inline]
    pub(crate) fn read(&self, key: &[u64], idx: usize) -> Bits {
        let seg = &self.segments[idx];
        Bits::from_words(seg.width, key[seg.word_range()].to_vec())
    }

    #[inline]
    pub(crate) fn write(&self, key: &mut [u64], idx: usize, value: &Bits) {
        let seg = &self.segments[idx];
        debug_assert_eq!(value.len(), seg.width);
        key[seg.word_range()].copy_from_slice(value.words());
    }

    #[inline]
    pub(crate) fn xor_into(&self, key: &mut [u64], idx: usize, value: &Bits) {
        let seg = &self.segments[idx];
        debug_assert_eq!(value.len(), seg.width);
        for (k, v) in key[seg.word_range()].iter_mut().zip(value.words()) {
            *k ^= v;
        }
    }

    /// Layout without the listed segments, plus the word ranges to copy when
    /// projecting a key onto it.
    pub(crate) fn without(&self, drop: &[usize]) -> Result<(RegisterLayout, Vec<std::ops::Range<usize>>)> {
        let mut kept = RegisterLayout::new(Vec::<(String, usize)>::new())?;
        let mut ranges = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            if !drop.contains(&i) {
                kept.push(seg.name.clone(), seg.width)?;
                ranges.push(seg.word_range());
            }
        }
        Ok((kept, ranges))
    }

    pub(crate) fn concat(&self, other: &RegisterLayout) -> Result<RegisterLayout> {
        let mut out = self.clone();
        for seg in &other.segments {
            out.push(seg.name.clone(), seg.width)?;
        }
        Ok(out)
    }

    pub(crate) fn renamed(&self, idx: usize, new_name: &str) -> Result<RegisterLayout> {
        if self.contains(new_name) {
            return Err(Error::DuplicateSegment(new_name.to_string()));
        }
        let mut out = RegisterLayout::new(Vec::<(String, usize)>::new())?;
        for (i, seg) in self.segments.iter().enumerate() {
            let name = if i == idx {
                new_name.to_string()
            } else {
                seg.name.clone()
            };
            out.push(name, seg.width)?;
        }
        Ok(out)
    }
}

pub(crate) fn project_key(key: &[u64], ranges: &[std::ops::Range<usize>], words: usize) -> Box<[u64]> {
    let mut out = Vec::with_capacity(words);
    for r in ranges {
        out.extend_from_slice(&key[r.clone()]);
    }
    out.into_boxed_slice()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_width() {
        assert!(matches!(
            RegisterLayout::new([("a", 1), ("a", 2)]),
            Err(Error::DuplicateSegment(_))
        ));
        assert!(RegisterLayout::new([("a", 0)]).is_err());
    }

    #[test]
    fn pack_unpack_round_trip() {
        let layout = RegisterLayout::new([("a", 3), ("b", 70), ("c", 1)]).unwrap();
        let mut bits = Bits::zeros(74);
        for i in (0..74).step_by(3) {
            bits.set(i, true);
        }
        let key = layout.pack(&bits).unwrap();
        assert_eq!(key.len(), 1 + 2 + 1);
        assert_eq!(layout.unpack(&key), bits);
        assert_eq!(layout.read(&key, 0).to_string(), "100");
    }
}
