//! Parity identity `x[i] = c_i ⊕ d_i·(s_{i,0} ⊕ s_{i,1})` checked on signed
//! BB84 positions against the dense reference.

#![allow(dead_code)]

use crskl::games::trial_rng;
use crskl::qreg::{SimConfig, SparseState};
use crskl::signed::{self, ct_name, s_name};
use crskl::skecd::SkecdVerificationKey;
use crskl::Bits;
use num_complex::Complex64;

use super::dense::{index_of, Dense};

#[derive(Clone, Debug, Default)]
pub struct ParityReport {
    pub cases: usize,
    /// Outcomes with nonzero dense probability that were checked.
    pub outcomes: usize,
    pub violations: usize,
    /// Outcomes where sparse and dense probabilities differ.
    pub mismatches: usize,
    /// Signed states that differ from the hand-built reference.
    pub bad_states: usize,
    pub sampled: usize,
    pub sampled_violations: usize,
}

fn signed_state(x: &Bits, theta: &Bits, pairs: &[[Bits; 2]]) -> SparseState {
    let vk = SkecdVerificationKey {
        x: x.clone(),
        theta: theta.clone(),
    };
    signed::sign_state(&vk, pairs, s_name, SimConfig::default()).unwrap()
}

/// `(|0⟩|p0⟩ + (−1)^x |1⟩|p1⟩)/√2` built directly.
fn reference(x: bool, p0: &Bits, p1: &Bits) -> Dense {
    let w = p0.len();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (1 + w)];
    amps[index_of(p0)] += Complex64::new(r, 0.0);
    amps[(1 << w) | index_of(p1)] += Complex64::new(if x { -r } else { r }, 0.0);
    Dense {
        segments: vec![(ct_name(0), 1), (s_name(0), w)],
        amps,
    }
}

/// Every `(x, s_0, s_1)` for one Hadamard position of signature width `w`,
/// every outcome in the support, plus `samples` sparse measurements each.
pub fn exhaustive(w: usize, samples: usize, seed: u64) -> ParityReport {
    let mut rep = ParityReport::default();
    let mut rng = trial_rng(seed, w as u64);
    let ct = ct_name(0);
    let s = s_name(0);
    let names = [ct.as_str(), s.as_str()];
    for x in [false, true] {
        for v0 in 0..1u64 << w {
            for v1 in 0..1u64 << w {
                let (p0, p1) = (Bits::from_u64(v0, w), Bits::from_u64(v1, w));
                let xor = p0.xor(&p1);
                let state = signed_state(&Bits::from_bools([x]), &Bits::parse("1").unwrap(), &[[p0.clone(), p1.clone()]]);
                let dense = reference(x, &p0, &p1);
                rep.cases += 1;
                if dense.overlap(&Dense::from_sparse(&state)) < 1.0 - 1e-9 {
                    rep.bad_states += 1;
                }
                let exact = dense.hadamard_distribution(&names);
                let sampler = state.hadamard_sampler(&names).unwrap();
                for v in 0..1u64 << (1 + w) {
                    let o = Bits::from_u64(v, 1 + w);
                    let p = exact.get(&o).copied().unwrap_or(0.0);
                    if (sampler.probability(&o) - p).abs() > 1e-9 {
                        rep.mismatches += 1;
                    }
                    if p > 1e-12 {
                        rep.outcomes += 1;
                        if x != (o.get(0) ^ o.slice(1, w).dot(&xor)) {
                            rep.violations += 1;
                        }
                    }
                }
                for _ in 0..samples {
                    let o = sampler.sample(&mut rng);
                    rep.sampled += 1;
                    if x != (o.get(0) ^ o.slice(1, w).dot(&xor)) {
                        rep.sampled_violations += 1;
                    }
                }
            }
        }
    }
    rep
}

/// Three positions with random `x`, `θ` and pairs, measured through the
/// grouped Hadamard measurement used by verification.
pub fn sampled_blocks(w: usize, trials: usize, seed: u64) -> ParityReport {
    let mut rep = ParityReport::default();
    let ell = 3;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let x = Bits::random(ell, &mut rng);
        let theta = Bits::random(ell, &mut rng);
        let pairs: Vec<[Bits; 2]> = (0..ell)
            .map(|_| [Bits::random(w, &mut rng), Bits::random(w, &mut rng)])
            .collect();
        let state = signed_state(&x, &theta, &pairs);
        let cts: Vec<String> = (0..ell).map(ct_name).collect();
        let sigs: Vec<String> = (0..ell).map(s_name).collect();
        let names: Vec<&str> = cts.iter().chain(&sigs).map(String::as_str).collect();
        let exact = Dense::from_sparse(&state).hadamard_distribution(&names);
        let (out, _) = signed::measure_hadamard_all(state, &names, &mut rng).unwrap();
        let joint = Bits::concat_all(names.iter().map(|n| &out[*n]));
        rep.cases += 1;
        if exact.get(&joint).copied().unwrap_or(0.0) < 1e-12 {
            rep.mismatches += 1;
        }
        for i in (0..ell).filter(|&i| theta.get(i)) {
            rep.sampled += 1;
            let c = out[&cts[i]].get(0);
            if x.get(i) != (c ^ out[&sigs[i]].dot(&pairs[i][0].xor(&pairs[i][1]))) {
                rep.sampled_violations += 1;
            }
        }
    }
    rep
}
