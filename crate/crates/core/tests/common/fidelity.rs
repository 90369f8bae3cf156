//! Random operation sequences run side by side on the sparse engine and the
//! dense reference.

#![allow(dead_code)]

use std::collections::BTreeMap;

use crskl::games::trial_rng;
use crskl::qreg::{RegisterLayout, SparseState};
use crskl::Bits;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use super::dense::{total_variation, Dense};

pub const MAX_BITS: usize = 12;

#[derive(Clone, Debug)]
pub struct SequenceResult {
    pub ops: Vec<String>,
    pub bits: usize,
    pub tv: f64,
    /// Smallest `|⟨sparse|dense⟩|` seen after any operation.
    pub min_overlap: f64,
    /// Sparse outcomes the dense reference gives probability zero.
    pub impossible: usize,
}

fn names(d: &Dense) -> Vec<String> {
    d.segments.iter().map(|(n, _)| n.clone()).collect()
}

/// Runs one sequence seeded by `(seed, index)` and samples the final
/// measurement `samples` times.
pub fn run_sequence(seed: u64, index: u64, samples: usize) -> SequenceResult {
    let mut rng = trial_rng(seed, index);
    let count = rng.gen_range(2..=4);
    let segs: Vec<(String, usize)> = (0..count).map(|i| (format!("r{i}"), rng.gen_range(1..=3))).collect();
    let bits: usize = segs.iter().map(|(_, w)| w).sum();
    let layout = RegisterLayout::new(segs.iter().map(|(n, w)| (n.as_str(), *w))).unwrap();
    let terms: Vec<(Bits, Complex64)> = (0..rng.gen_range(1..=8))
        .map(|_| {
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (Bits::random(bits, &mut rng), amp)
        })
        .collect();
    let mut sparse = SparseState::from_terms(layout, terms).unwrap();
    let mut dense = Dense::from_sparse(&sparse);
    let mut out = SequenceResult {
        ops: Vec::new(),
        bits,
        tv: 0.0,
        min_overlap: 1.0,
        impossible: 0,
    };
    let mut appended = 0;

    for _ in 0..rng.gen_range(2..=6) {
        let all = names(&dense);
        match rng.gen_range(0..4) {
            0 if all.len() >= 2 => {
                let dst = all.choose(&mut rng).unwrap().clone();
                let others: Vec<&str> = all.iter().filter(|n| **n != dst).map(String::as_str).collect();
                let k = rng.gen_range(1..=others.len());
                let src: Vec<&str> = others.choose_multiple(&mut rng, k).copied().collect();
                let src_bits: usize = src.iter().map(|n| dense.positions(n).len()).sum();
                let w = dense.positions(&dst).len();
                let table: Vec<u64> = (0..1u64 << src_bits).map(|_| rng.gen_range(0..1u64 << w)).collect();
                let g = |u: &Bits| Bits::from_u64(table[u.to_u64() as usize], w);
                sparse.apply_xor_oracle(&src, &dst, g).unwrap();
                dense.xor_oracle(&src, &dst, g);
                out.ops.push(format!("xor {src:?}->{dst}"));
            }
            1 if dense.bits() < MAX_BITS => {
                let w = rng.gen_range(1..=(MAX_BITS - dense.bits()).min(2));
                let name = format!("a{appended}");
                appended += 1;
                sparse.append_segment(&name, w).unwrap();
                dense.append(&name, w);
                out.ops.push(format!("append {name}:{w}"));
            }
            2 => {
                let name = all.choose(&mut rng).unwrap().clone();
                let (o, post) = sparse.measure_computational(&[&name], &mut rng).unwrap();
                let p = dense.distribution(&[&name]).get(&o.bits).copied().unwrap_or(0.0);
                out.impossible += (p < 1e-12) as usize;
                dense.project(&[&name], &o.bits);
                sparse = post;
                out.ops.push(format!("measure-z {name}"));
            }
            _ if all.len() >= 2 => {
                let name = all.choose(&mut rng).unwrap().clone();
                let (o, post) = sparse.measure_hadamard(&[&name], &mut rng).unwrap();
                let p = dense.hadamard_distribution(&[&name]).get(&o.bits).copied().unwrap_or(0.0);
                out.impossible += (p < 1e-12) as usize;
                dense.hadamard(&[&name]);
                dense.project(&[&name], &o.bits);
                dense.remove(&[&name]);
                sparse = post;
                out.ops.push(format!("measure-x {name}"));
            }
            _ => continue,
        }
        out.min_overlap = out.min_overlap.min(dense.overlap(&Dense::from_sparse(&sparse)));
    }

    // final measurement on at most 3 bits keeps the outcome space small
    // enough for the sample size
    let mut pool = names(&dense);
    pool.shuffle(&mut rng);
    let mut chosen: Vec<String> = Vec::new();
    let mut width = 0;
    for n in pool {
        let w = dense.positions(&n).len();
        if width + w <= 3 {
            width += w;
            chosen.push(n);
        }
    }
    if chosen.is_empty() {
        let n = names(&dense).remove(0);
        chosen.push(n);
    }
    let refs: Vec<&str> = chosen.iter().map(String::as_str).collect();
    let hadamard: bool = rng.gen();
    let (exact, counts) = if hadamard {
        let sampler = sparse.hadamard_sampler(&refs).unwrap();
        (dense.hadamard_distribution(&refs), tally((0..samples).map(|_| sampler.sample(&mut rng))))
    } else {
        let sampler = sparse.computational_sampler(&refs).unwrap();
        (dense.distribution(&refs), tally((0..samples).map(|_| sampler.sample(&mut rng))))
    };
    out.ops.push(format!("final {} {refs:?}", if hadamard { "x" } else { "z" }));
    out.tv = total_variation(&exact, &counts, samples);
    out
}

fn tally(it: impl Iterator<Item = Bits>) -> BTreeMap<Bits, usize> {
    let mut m = BTreeMap::new();
    for b in it {
        *m.entry(b).or_insert(0) += 1;
    }
    m
}
