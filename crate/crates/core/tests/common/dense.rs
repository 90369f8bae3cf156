//! Dense statevector reference. Works on a full amplitude vector and
//! applies Hadamard gates by butterflies, so it shares no measurement code
//! with the sparse engine.

#![allow(dead_code)]

use std::collections::BTreeMap;

use crskl::qreg::SparseState;
use crskl::Bits;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Dense {
    pub segments: Vec<(String, usize)>,
    pub amps: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Dense {
    pub fn from_sparse(s: &SparseState) -> Self {
        let segments: Vec<(String, usize)> = s
            .layout()
            .segments()
            .iter()
            .map(|g| (g.name().to_string(), g.width()))
            .collect();
        let n: usize = segments.iter().map(|(_, w)| w).sum();
        assert!(n <= 20, "dense reference limited to 20 bits");
        let mut amps = vec![zero(); 1 << n];
        for (bits, a) in s.terms() {
            amps[index_of(&bits)] += a;
        }
        Self { segments, amps }
    }

    pub fn bits(&self) -> usize {
        self.segments.iter().map(|(_, w)| w).sum()
    }

    /// Global bit positions of a segment, MSB first.
    pub fn positions(&self, name: &str) -> Vec<usize> {
        let mut start = 0;
        for (n, w) in &self.segments {
            if n == name {
                return (start..start + w).collect();
            }
            start += w;
        }
        panic!("no segment {name}");
    }

    fn positions_of(&self, names: &[&str]) -> Vec<usize> {
        names.iter().flat_map(|n| self.positions(n)).collect()
    }

    fn mask(&self, pos: usize) -> usize {
        1 << (self.bits() - 1 - pos)
    }

    fn read(&self, idx: usize, pos: &[usize]) -> Bits {
        Bits::from_bools(pos.iter().map(|&p| idx & self.mask(p) != 0))
    }

    pub fn xor_oracle(&mut self, src: &[&str], dst: &str, g: impl Fn(&Bits) -> Bits) {
        let sp = self.positions_of(src);
        let dp = self.positions(dst);
        let mut out = vec![zero(); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let v = g(&self.read(idx, &sp));
            let mut j = idx;
            for (k, &p) in dp.iter().enumerate() {
                if v.get(k) {
                    j ^= self.mask(p);
                }
            }
            out[j] += a;
        }
        self.amps = out;
    }

    pub fn hadamard(&mut self, names: &[&str]) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for p in self.positions_of(names) {
            let m = self.mask(p);
            for idx in 0..self.amps.len() {
                if idx & m == 0 {
                    let (a, b) = (self.amps[idx], self.amps[idx | m]);
                    self.amps[idx] = (a + b) * r;
                    self.amps[idx | m] = (a - b) * r;
                }
            }
        }
    }

    pub fn distribution(&self, names: &[&str]) -> BTreeMap<Bits, f64> {
        let pos = self.positions_of(names);
        let mut out = BTreeMap::new();
        for (idx, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 1e-15 {
                *out.entry(self.read(idx, &pos)).or_insert(0.0) += p;
            }
        }
        out
    }

    pub fn hadamard_distribution(&self, names: &[&str]) -> BTreeMap<Bits, f64> {
        let mut d = self.clone();
        d.hadamard(names);
        d.distribution(names)
    }

    /// Projects onto `outcome` and renormalizes; the segments stay.
    pub fn project(&mut self, names: &[&str], outcome: &Bits) {
        let pos = self.positions_of(names);
        for idx in 0..self.amps.len() {
            if self.read(idx, &pos) != *outcome {
                self.amps[idx] = zero();
            }
        }
        let norm: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut self.amps {
            *a /= norm;
        }
    }

    /// Drops segments that hold a definite value.
    pub fn remove(&mut self, names: &[&str]) {
        let drop = self.positions_of(names);
        let keep: Vec<usize> = (0..self.bits()).filter(|p| !drop.contains(p)).collect();
        let mut out = vec![zero(); 1 << keep.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                out[index_of(&self.read(idx, &keep))] += a;
            }
        }
        self.segments.retain(|(n, _)| !names.contains(&n.as_str()));
        self.amps = out;
    }

    pub fn append(&mut self, name: &str, width: usize) {
        let mut out = vec![zero(); self.amps.len() << width];
        for (idx, a) in self.amps.iter().enumerate() {
            out[idx << width] = *a;
        }
        self.segments.push((name.to_string(), width));
        self.amps = out;
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &Dense) -> f64 {
        assert_eq!(self.segments, other.segments);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

pub fn index_of(bits: &Bits) -> usize {
    bits.iter().fold(0, |acc, b| (acc << 1) | b as usize)
}

pub fn total_variation(exact: &BTreeMap<Bits, f64>, counts: &BTreeMap<Bits, usize>, samples: usize) -> f64 {
    let mut keys: Vec<&Bits> = exact.keys().chain(counts.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.iter()
        .map(|k| {
            let p = exact.get(*k).copied().unwrap_or(0.0);
            let q = counts.get(*k).copied().unwrap_or(0) as f64 / samples as f64;
            (p - q).abs()
        })
        .sum::<f64>()
        / 2.0
}
