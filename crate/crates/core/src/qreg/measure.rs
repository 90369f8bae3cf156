use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::Rng;

use std::ops::Range;

use super::{layout, Key, RegisterLayout, SparseState};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::gf2::Gf2Basis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Computational,
    Hadamard,
}

/// Classical result of measuring a list of segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementOutcome {
    pub bits: Bits,
    pub basis: Basis,
    pub segments: Vec<(String, usize)>,
}

impl MeasurementOutcome {
    /// The bits belonging to one measured segment.
    pub fn segment(&self, name: &str) -> Option<Bits> {
        let mut pos = 0;
        for (n, w) in &self.segments {
            if n == name {
                return Some(self.bits.slice(pos, *w));
            }
            pos += w;
        }
        None
    }
}

fn resolve(state: &SparseState, names: &[&str]) -> Result<Vec<usize>> {
    let mut idxs = Vec::with_capacity(names.len());
    for name in names {
        let i = state.layout.index_of(name)?;
        if idxs.contains(&i) {
            return Err(Error::DuplicateSegment(name.to_string()));
        }
        idxs.push(i);
    }
    Ok(idxs)
}

fn seg_list(state: &SparseState, idxs: &[usize]) -> Vec<(String, usize)> {
    idxs.iter()
        .map(|&i| {
            let s = state.layout.segment(i);
            (s.name().to_string(), s.width())
        })
        .collect()
}

/// Layout of just the measured segments, plus their word ranges in the
/// full key. Measured bits are handled in this padded form and only
/// unpacked for the caller.
fn measured_layout(state: &SparseState, idxs: &[usize]) -> Result<(RegisterLayout, Vec<Range<usize>>)> {
    let layout = RegisterLayout::new(idxs.iter().map(|&i| {
        let s = state.layout.segment(i);
        (s.name().to_string(), s.width())
    }))?;
    let ranges = idxs.iter().map(|&i| state.layout.segment(i).word_range()).collect();
    Ok((layout, ranges))
}

fn padded(words: &[u64]) -> Bits {
    Bits::from_words(words.len() * 64, words.to_vec())
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut t = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if t < *w {
            return i;
        }
        t -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Outcome distribution of a computational-basis measurement, reusable
/// across many samples of the same state.
#[derive(Clone, Debug)]
pub struct ComputationalSampler<'a> {
    state: &'a SparseState,
    idxs: Vec<usize>,
    measured: RegisterLayout,
    ranges: Vec<Range<usize>>,
    outcomes: Vec<Bits>,
    probs: Vec<f64>,
}

impl<'a> ComputationalSampler<'a> {
    pub fn distribution(&self) -> BTreeMap<Bits, f64> {
        self.outcomes.iter().cloned().zip(self.probs.iter().copied()).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Bits {
        self.outcomes[sample_index(&self.probs, rng)].clone()
    }

    /// Post-measurement state for `outcome`; the measured segments stay in
    /// the layout, collapsed to the observed value.
    pub fn project(&self, outcome: &Bits) -> Result<SparseState> {
        let target = self.measured.pack(outcome)?;
        let terms: BTreeMap<Key, Complex64> = self
            .state
            .terms
            .iter()
            .filter(|(k, _)| layout::project_key(k, &self.ranges, target.len()) == target)
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        let mut out = SparseState::from_parts((*self.state.layout).clone(), terms, self.state.config);
        out.renormalize()?;
        Ok(out)
    }

    pub fn outcome(&self, bits: Bits) -> MeasurementOutcome {
        MeasurementOutcome {
            bits,
            basis: Basis::Computational,
            segments: seg_list(self.state, &self.idxs),
        }
    }
}

/// Hadamard-basis measurement of a list of segments.
///
/// With `z_j` the measured bits of term `j` and `w_j = z_j ⊕ z_0`, the
/// probability of outcome `d` depends only on the parities of `d` against a
/// basis of `span{w_j}`. Sampling draws those parities by measuring the
/// rank-`r` coordinate register one qubit at a time, then picks `d`
/// uniformly among the strings with those parities.
#[derive(Clone, Debug)]
pub struct HadamardSampler<'a> {
    state: &'a SparseState,
    idxs: Vec<usize>,
    width: usize,
    measured: RegisterLayout,
    basis: Gf2Basis,
    rest_layout: RegisterLayout,
    rest_keys: Vec<Key>,
    /// `(rest id, coordinates of w_j, α_j)`
    entries: Vec<(usize, u64, Complex64)>,
}

impl<'a> HadamardSampler<'a> {
    fn new(state: &'a SparseState, idxs: Vec<usize>) -> Result<Self> {
        let (measured, measured_ranges) = measured_layout(state, &idxs)?;
        let width = measured.total_bits();
        let (rest_layout, ranges) = state.layout.without(&idxs)?;
        let words = rest_layout.key_words();
        let mut basis = Gf2Basis::new(measured.key_words() * 64, state.config.r_max);
        let mut rest_ids: HashMap<Key, usize> = HashMap::new();
        let mut rest_keys = Vec::new();
        let mut entries = Vec::with_capacity(state.terms.len());
        let mut z0 = None;
        for (key, amp) in &state.terms {
            let z = padded(&layout::project_key(key, &measured_ranges, measured.key_words()));
            let z0 = z0.get_or_insert_with(|| z.clone());
            let coord = basis.insert(&z.xor(z0)).map_err(|e| match e {
                Error::RankExceeded { rank, .. } => Error::RankExceeded {
                    rank,
                    r_max: state.config.r_max,
                },
                other => other,
            })?;
            let rest = layout::project_key(key, &ranges, words);
            let next = rest_keys.len();
            let id = *rest_ids.entry(rest.clone()).or_insert(next);
            if id == next {
                rest_keys.push(rest);
            }
            entries.push((id, coord, *amp));
        }
        Ok(Self {
            state,
            idxs,
            width,
            measured,
            basis,
            rest_layout,
            rest_keys,
            entries,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    fn class_weight(&self, parities: u64) -> f64 {
        let mut sums = vec![Complex64::new(0.0, 0.0); self.rest_keys.len()];
        for (id, coord, amp) in &self.entries {
            if (coord & parities).count_ones() % 2 == 1 {
                sums[*id] -= amp;
            } else {
                sums[*id] += amp;
            }
        }
        sums.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Exact `Pr[d]`.
    pub fn probability(&self, d: &Bits) -> f64 {
        let d = padded(&self.measured.pack(d).expect("outcome width"));
        let weight = self.class_weight(self.basis.parities_of(&d));
        weight / 2f64.powi(self.width as i32)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Bits {
        let mut amps: BTreeMap<(usize, u64), Complex64> = BTreeMap::new();
        for (id, coord, amp) in &self.entries {
            *amps.entry((*id, *coord)).or_default() += amp;
        }
        let mut parities = 0u64;
        for k in 0..self.basis.rank() {
            let bit = 1u64 << k;
            let mut pairs: BTreeMap<(usize, u64), [Complex64; 2]> = BTreeMap::new();
            for (&(id, c), a) in &amps {
                pairs.entry((id, c & !bit)).or_default()[(c & bit != 0) as usize] += a;
            }
            let p0: f64 = pairs.values().map(|[a, b]| (a + b).norm_sqr()).sum();
            let p1: f64 = pairs.values().map(|[a, b]| (a - b).norm_sqr()).sum();
            let one = sample_index(&[p0, p1], rng) == 1;
            if one {
                parities |= bit;
            }
            let sign = if one { -1.0 } else { 1.0 };
            let norm = if one { p1 } else { p0 }.sqrt();
            amps = pairs
                .into_iter()
                .map(|(k, [a, b])| (k, (a + b * sign) / norm))
                .collect();
        }
        let d = self.basis.sample_solution(parities, rng);
        self.measured.unpack(d.words())
    }

    /// Post-measurement state for outcome `d`; the measured segments are
    /// removed from the layout.
    pub fn project(&self, d: &Bits) -> Result<SparseState> {
        let d = padded(&self.measured.pack(d)?);
        let parities = self.basis.parities_of(&d);
        let mut sums = vec![Complex64::new(0.0, 0.0); self.rest_keys.len()];
        for (id, coord, amp) in &self.entries {
            if (coord & parities).count_ones() % 2 == 1 {
                sums[*id] -= amp;
            } else {
                sums[*id] += amp;
            }
        }
        // the common factor (−1)^{d·z_0} is a global phase
        let terms = self
            .rest_keys
            .iter()
            .cloned()
            .zip(sums)
            .collect::<BTreeMap<_, _>>();
        let mut out = SparseState::from_parts(self.rest_layout.clone(), terms, self.state.config);
        out.renormalize()?;
        Ok(out)
    }

    pub fn outcome(&self, bits: Bits) -> MeasurementOutcome {
        MeasurementOutcome {
            bits,
            basis: Basis::Hadamard,
            segments: seg_list(self.state, &self.idxs),
        }
    }
}

impl SparseState {
    pub fn computational_sampler(&self, segments: &[&str]) -> Result<ComputationalSampler<'_>> {
        let idxs = resolve(self, segments)?;
        let (measured, ranges) = measured_layout(self, &idxs)?;
        let mut dist: BTreeMap<Key, f64> = BTreeMap::new();
        for (key, amp) in &self.terms {
            *dist
                .entry(layout::project_key(key, &ranges, measured.key_words()))
                .or_default() += amp.norm_sqr();
        }
        let norm: f64 = dist.values().sum();
        let (outcomes, probs) = dist
            .into_iter()
            .map(|(k, p)| (measured.unpack(&k), p / norm))
            .unzip();
        Ok(ComputationalSampler {
            state: self,
            idxs,
            measured,
            ranges,
            outcomes,
            probs,
        })
    }

    /// Outcome probabilities of a computational-basis measurement.
    pub fn computational_distribution(&self, segments: &[&str]) -> Result<BTreeMap<Bits, f64>> {
        Ok(self.computational_sampler(segments)?.distribution())
    }

    pub fn hadamard_sampler(&self, segments: &[&str]) -> Result<HadamardSampler<'_>> {
        let idxs = resolve(self, segments)?;
        HadamardSampler::new(self, idxs)
    }

    /// Measures in the computational basis. The segments remain, collapsed.
    pub fn measure_computational<R: Rng + ?Sized>(
        self,
        segments: &[&str],
        rng: &mut R,
    ) -> Result<(MeasurementOutcome, SparseState)> {
        let sampler = self.computational_sampler(segments)?;
        let bits = sampler.sample(rng);
        let post = sampler.project(&bits)?;
        Ok((sampler.outcome(bits), post))
    }

    /// Measures in the Hadamard basis. The measured segments are removed.
    pub fn measure_hadamard<R: Rng + ?Sized>(
        self,
        segments: &[&str],
        rng: &mut R,
    ) -> Result<(MeasurementOutcome, SparseState)> {
        let sampler = self.hadamard_sampler(segments)?;
        let bits = sampler.sample(rng);
        let post = sampler.project(&bits)?;
        Ok((sampler.outcome(bits), post))
    }

    /// Discards a segment without recording it. On the remaining registers
    /// this equals measuring it in the computational basis and forgetting
    /// the result.
    pub fn trace_out<R: Rng + ?Sized>(self, segment: &str, rng: &mut R) -> Result<SparseState> {
        let (_, mut post) = self.measure_computational(&[segment], rng)?;
        post.discard_definite(segment)?;
        Ok(post)
    }
}
