//! Sparse statevector engine.
//!
//! Every circuit the leasing schemes run is a basis permutation (XOR
//! oracles) plus measurements, so a state is kept as an explicit map from
//! basis strings to amplitudes. Honest keys carry `2^h` terms where `h` is
//! the number of Hadamard-basis positions.

mod dump;
mod layout;
mod measure;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;

use crate::bits::Bits;
use crate::error::{Error, Result};

pub use dump::{SegmentDump, StateDump, TermDump};
pub use layout::{RegisterLayout, Segment};
pub use measure::{Basis, ComputationalSampler, HadamardSampler, MeasurementOutcome};

/// Amplitudes with modulus below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;
/// Allowed drift of `Σ|α|²` from one.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub term_cap: usize,
    pub hadamard_cap: usize,
    pub r_max: usize,
    pub dense_limit: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            term_cap: 1 << 20,
            hadamard_cap: 20,
            r_max: 20,
            dense_limit: 24,
        }
    }
}

pub(crate) type Key = Box<[u64]>;

/// Normalized superposition over the basis strings of a [`RegisterLayout`].
#[derive(Clone, Debug)]
pub struct SparseState {
    layout: Arc<RegisterLayout>,
    terms: BTreeMap<Key, Complex64>,
    config: SimConfig,
}

/// Read-only view of one basis term, handed to oracle functions.
pub struct TermView<'a> {
    layout: &'a RegisterLayout,
    key: &'a [u64],
}

impl TermView<'_> {
    pub fn segment(&self, idx: usize) -> Bits {
        self.layout.read(self.key, idx)
    }

    pub fn segment_named(&self, name: &str) -> Result<Bits> {
        Ok(self.layout.read(self.key, self.layout.index_of(name)?))
    }

    /// Concatenation of the given segments, in the order listed.
    pub fn concat(&self, idxs: &[usize]) -> Bits {
        let mut out = Bits::zeros(0);
        for &i in idxs {
            out.extend(&self.layout.read(self.key, i));
        }
        out
    }

    pub fn bits(&self) -> Bits {
        self.layout.unpack(self.key)
    }
}

impl SparseState {
    pub fn basis_state(layout: RegisterLayout, bits: &Bits) -> Result<Self> {
        Self::basis_state_with(SimConfig::default(), layout, bits)
    }

    pub fn basis_state_with(config: SimConfig, layout: RegisterLayout, bits: &Bits) -> Result<Self> {
        let key = layout.pack(bits)?;
        let mut terms = BTreeMap::new();
        terms.insert(key, Complex64::new(1.0, 0.0));
        Ok(Self {
            layout: Arc::new(layout),
            terms,
            config,
        })
    }

    pub fn zero_state(layout: RegisterLayout) -> Self {
        let bits = Bits::zeros(layout.total_bits());
        Self::basis_state(layout, &bits).expect("zero string matches layout")
    }

    /// BB84 state over one-qubit segments `Q_1 … Q_n`.
    pub fn prepare_bb84(x: &Bits, theta: &Bits) -> Result<Self> {
        Self::prepare_bb84_with(SimConfig::default(), x, theta, |i| format!("Q_{}", i + 1))
    }

    /// BB84 state with caller-chosen segment names: `|x_i⟩` where
    /// `θ_i = 0`, and `(|0⟩ + (-1)^{x_i}|1⟩)/√2` where `θ_i = 1`.
    pub fn prepare_bb84_with<F: Fn(usize) -> String>(
        config: SimConfig,
        x: &Bits,
        theta: &Bits,
        name: F,
    ) -> Result<Self> {
        if x.len() != theta.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                actual: theta.len(),
            });
        }
        let n = x.len();
        let h = theta.weight();
        if h > config.hadamard_cap {
            return Err(Error::HadamardCapExceeded {
                weight: h,
                cap: config.hadamard_cap,
            });
        }
        if (1usize << h) > config.term_cap {
            return Err(Error::TermCapExceeded {
                terms: 1 << h,
                cap: config.term_cap,
            });
        }
        let layout = RegisterLayout::new((0..n).map(|i| (name(i), 1)))?;
        let hadamard: Vec<usize> = (0..n).filter(|&i| theta.get(i)).collect();
        let amp = (0.5f64).powf(h as f64 / 2.0);
        let mut terms = BTreeMap::new();
        for mask in 0u64..(1u64 << h) {
            let mut bits = x.clone();
            let mut negative = false;
            for (j, &pos) in hadamard.iter().enumerate() {
                let b = (mask >> j) & 1 == 1;
                bits.set(pos, b);
                if b && x.get(pos) {
                    negative = !negative;
                }
            }
            let sign = if negative { -1.0 } else { 1.0 };
            terms.insert(layout.pack(&bits)?, Complex64::new(sign * amp, 0.0));
        }
        Ok(Self {
            layout: Arc::new(layout),
            terms,
            config,
        })
    }

    /// Builds a state from explicit terms; amplitudes are renormalized.
    pub fn from_terms<I>(layout: RegisterLayout, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Bits, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (bits, amp) in terms {
            *map.entry(layout.pack(&bits)?).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let config = SimConfig::default();
        if map.len() > config.term_cap {
            return Err(Error::TermCapExceeded {
                terms: map.len(),
                cap: config.term_cap,
            });
        }
        let mut state = Self {
            layout: Arc::new(layout),
            terms: map,
            config,
        };
        state.renormalize()?;
        Ok(state)
    }

    pub fn config(&self) -> SimConfig {
        self.config
    }

    pub fn with_config(mut self, config: SimConfig) -> Result<Self> {
        if self.terms.len() > config.term_cap {
            return Err(Error::TermCapExceeded {
                terms: self.terms.len(),
                cap: config.term_cap,
            });
        }
        self.config = config;
        Ok(self)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Terms in lexicographic order of their basis strings.
    pub fn terms(&self) -> impl Iterator<Item = (Bits, Complex64)> + '_ {
        self.terms.iter().map(|(k, a)| (self.layout.unpack(k), *a))
    }

    pub fn term_views(&self) -> impl Iterator<Item = (TermView<'_>, Complex64)> + '_ {
        self.terms.iter().map(|(k, a)| {
            (
                TermView {
                    layout: &self.layout,
                    key: k,
                },
                *a,
            )
        })
    }

    pub fn amplitude(&self, bits: &Bits) -> Result<Complex64> {
        let key = self.layout.pack(bits)?;
        Ok(self.terms.get(&key).copied().unwrap_or_default())
    }

    /// Distinct values the segment takes across the support.
    pub fn segment_values(&self, name: &str) -> Result<BTreeSet<Bits>> {
        let idx = self.layout.index_of(name)?;
        Ok(self.terms.keys().map(|k| self.layout.read(k, idx)).collect())
    }

    pub fn tensor(&self, other: &SparseState) -> Result<SparseState> {
        let layout = self.layout.concat(&other.layout)?;
        let count = self.terms.len().saturating_mul(other.terms.len());
        if count > self.config.term_cap {
            return Err(Error::TermCapExceeded {
                terms: count,
                cap: self.config.term_cap,
            });
        }
        let mut terms = BTreeMap::new();
        for (ka, aa) in &self.terms {
            for (kb, ab) in &other.terms {
                let mut key = Vec::with_capacity(layout.key_words());
                key.extend_from_slice(ka);
                key.extend_from_slice(kb);
                terms.insert(key.into_boxed_slice(), aa * ab);
            }
        }
        let mut out = Self {
            layout: Arc::new(layout),
            terms,
            config: self.config,
        };
        out.prune();
        Ok(out)
    }

    /// Appends a fresh segment initialized to `|0…0⟩`.
    pub fn append_segment(&mut self, name: &str, width: usize) -> Result<()> {
        self.append_segments(&[(name.to_string(), width)])
    }

    pub fn append_segments(&mut self, segs: &[(String, usize)]) -> Result<()> {
        let mut layout = (*self.layout).clone();
        for (name, width) in segs {
            layout.push(name.clone(), *width)?;
        }
        let extra = layout.key_words() - self.layout.key_words();
        let terms = std::mem::take(&mut self.terms)
            .into_iter()
            .map(|(k, a)| {
                let mut key = k.into_vec();
                key.resize(key.len() + extra, 0);
                (key.into_boxed_slice(), a)
            })
            .collect();
        self.terms = terms;
        self.layout = Arc::new(layout);
        Ok(())
    }

    pub fn rename_segment(&mut self, old: &str, new: &str) -> Result<()> {
        let idx = self.layout.index_of(old)?;
        self.layout = Arc::new(self.layout.renamed(idx, new)?);
        Ok(())
    }

    /// Applies `|src⟩|dst⟩ → |src⟩|dst ⊕ g(src)⟩`, where `src` is the
    /// concatenation of the listed segments.
    pub fn apply_xor_oracle<G>(&mut self, src: &[&str], dst: &str, g: G) -> Result<()>
    where
        G: Fn(&Bits) -> Bits,
    {
        let src_idx: Vec<usize> = src
            .iter()
            .map(|s| self.layout.index_of(s))
            .collect::<Result<_>>()?;
        let dst_idx = self.layout.index_of(dst)?;
        if src_idx.contains(&dst_idx) {
            return Err(Error::OverlappingSegments(dst.to_string()));
        }
        self.apply_xor_fn(&[dst_idx], |view, out| {
            out.push(g(&view.concat(&src_idx)));
        })
    }

    /// Same map applied blockwise: for each `(src_i, dst_i)` pair,
    /// `dst_i ⊕= g(i, src_i)`. One pass over the terms.
    pub fn apply_xor_blocks<G>(&mut self, blocks: &[(&str, &str)], g: G) -> Result<()>
    where
        G: Fn(usize, &Bits) -> Bits,
    {
        let mut srcs = Vec::with_capacity(blocks.len());
        let mut dsts = Vec::with_capacity(blocks.len());
        for (s, d) in blocks {
            srcs.push(self.layout.index_of(s)?);
            dsts.push(self.layout.index_of(d)?);
        }
        if let Some(clash) = dsts.iter().find(|d| srcs.contains(d)) {
            return Err(Error::OverlappingSegments(
                self.layout.segment(*clash).name().to_string(),
            ));
        }
        let unique: BTreeSet<_> = dsts.iter().collect();
        if unique.len() != dsts.len() {
            return Err(Error::InvalidLayout("destination segments repeat".into()));
        }
        self.apply_xor_fn(&dsts, |view, out| {
            for (i, &s) in srcs.iter().enumerate() {
                out.push(g(i, &view.segment(s)));
            }
        })
    }

    /// General XOR oracle: `f` writes one value per destination segment.
    /// `f` must not depend on the destination segments, which makes the map
    /// a basis permutation.
    pub(crate) fn apply_xor_fn<F>(&mut self, dsts: &[usize], f: F) -> Result<()>
    where
        F: Fn(&TermView<'_>, &mut Vec<Bits>),
    {
        let layout = Arc::clone(&self.layout);
        let mut out = BTreeMap::new();
        let mut vals = Vec::with_capacity(dsts.len());
        for (key, amp) in std::mem::take(&mut self.terms) {
            vals.clear();
            f(
                &TermView {
                    layout: &layout,
                    key: &key,
                },
                &mut vals,
            );
            let mut key = key;
            for (&d, v) in dsts.iter().zip(&vals) {
                let width = layout.segment(d).width();
                if v.len() != width {
                    return Err(Error::LengthMismatch {
                        expected: width,
                        actual: v.len(),
                    });
                }
                layout.xor_into(&mut key, d, v);
            }
            *out.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        self.terms = out;
        self.prune();
        Ok(())
    }

    /// Removes a segment that holds one definite basis value in every term
    /// and returns that value.
    pub fn discard_definite(&mut self, name: &str) -> Result<Bits> {
        let idx = self.layout.index_of(name)?;
        let values = self.segment_values(name)?;
        if values.len() != 1 {
            return Err(Error::NotDefinite(name.to_string()));
        }
        let value = values.into_iter().next().expect("one value");
        let (layout, ranges) = self.layout.without(&[idx])?;
        let words = layout.key_words();
        self.terms = std::mem::take(&mut self.terms)
            .into_iter()
            .map(|(k, a)| (layout::project_key(&k, &ranges, words), a))
            .collect();
        self.layout = Arc::new(layout);
        Ok(value)
    }

    /// Exact amplitude vector, indexed by the basis string read as a
    /// big-endian integer.
    pub fn dense_oracle(&self) -> Result<Vec<Complex64>> {
        let bits = self.layout.total_bits();
        if bits > self.config.dense_limit {
            return Err(Error::DenseLimit {
                bits,
                limit: self.config.dense_limit,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); 1usize << bits];
        for (b, a) in self.terms() {
            let idx = b.iter().fold(0usize, |acc, bit| (acc << 1) | bit as usize);
            out[idx] = a;
        }
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &SparseState) -> Result<Complex64> {
        if *self.layout != *other.layout {
            return Err(Error::LayoutMismatch);
        }
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub(crate) fn renormalize(&mut self) -> Result<()> {
        self.prune();
        let norm = self.norm_sqr();
        if norm <= PRUNE_THRESHOLD * PRUNE_THRESHOLD || !norm.is_finite() {
            return Err(Error::ZeroProbability);
        }
        let scale = 1.0 / norm.sqrt();
        for a in self.terms.values_mut() {
            *a *= scale;
        }
        self.prune();
        Ok(())
    }

    pub(crate) fn from_parts(
        layout: RegisterLayout,
        terms: BTreeMap<Key, Complex64>,
        config: SimConfig,
    ) -> Self {
        Self {
            layout: Arc::new(layout),
            terms,
            config,
        }
    }

}

/// `|⟨a|b⟩| ≥ 1 − tol`; global phase is ignored.
pub fn states_equal(a: &SparseState, b: &SparseState, tol: f64) -> Result<bool> {
    Ok(a.inner_product(b)?.norm() >= 1.0 - tol)
}
