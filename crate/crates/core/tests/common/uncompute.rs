//! Verification uncompute of the ABE.SK register on honest keys.

#![allow(dead_code)]

use crskl::feskl::{self, AbeSklParams};
use crskl::games::trial_rng;
use crskl::pkecrskl::{self, PkeParams, ABE_SK};
use crskl::qreg::SparseState;
use crskl::Bits;

/// Terms whose ABE.SK is nonzero.
fn count_nonzero(state: &SparseState) -> usize {
    let idx = state.layout().index_of(ABE_SK).unwrap();
    let mut bad = 0;
    for (view, _) in state.term_views() {
        bad += !view.segment(idx).is_zero() as usize;
    }
    bad
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UncomputeCount {
    pub terms: usize,
    /// Terms with a nonzero ABE.SK before the uncompute.
    pub before: usize,
    pub after: usize,
}

pub fn pke(lambda: usize, n: usize, h: usize, seed: u64) -> UncomputeCount {
    let mut rng = trial_rng(seed, h as u64);
    let (_, msk) = pkecrskl::setup(PkeParams::new(lambda, n, h), &mut rng).unwrap();
    let (dk, vk) = pkecrskl::kg(&msk, &mut rng).unwrap();
    UncomputeCount {
        terms: dk.state.term_count(),
        before: count_nonzero(&dk.state),
        after: count_nonzero(&pkecrskl::uncompute(&vk, &dk).unwrap()),
    }
}

pub fn abe(lambda: usize, n: usize, h: usize, attr_bits: usize, seed: u64) -> UncomputeCount {
    let mut rng = trial_rng(seed, h as u64);
    let (_, msk) = feskl::abe_skl_setup(AbeSklParams::new(lambda, n, h, attr_bits), &mut rng).unwrap();
    let y = Bits::random(attr_bits, &mut rng);
    let (key, vk) = msk.kg(&y, &mut rng).unwrap();
    UncomputeCount {
        terms: key.state.term_count(),
        before: count_nonzero(&key.state),
        after: count_nonzero(&key.uncompute(&vk).unwrap()),
    }
}
