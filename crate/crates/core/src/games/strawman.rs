//! The strawman that hands every user the same superposition
//! `(|0⟩|sk₀⟩ + |1⟩|sk₁⟩)/√2` over two key pairs. Measuring a few copies
//! reveals both secret keys, after which the state can be rebuilt exactly.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::adversary::MeasureAndCopy;
use super::challenger::KlaGame;
use super::schemes::{KlaInstance, KlaScheme, LeasedKey, Returned};
use super::{run_kla, GameReport, RunOptions, TrialRng};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prims::SkeKey;
use crate::qreg::{RegisterLayout, SparseState};
use crate::signed;

pub const BRANCH: &str = "B";
pub const SECRET: &str = "SK";

#[derive(Clone, Copy, Debug)]
pub struct StrawmanScheme {
    pub lambda: usize,
}

pub struct StrawmanInstance {
    keys: [SkeKey; 2],
    vk: SparseState,
    issued: usize,
}

#[derive(Clone, Debug)]
pub struct StrawmanCt {
    pub c0: Bits,
    pub c1: Bits,
}

impl KlaScheme for StrawmanScheme {
    type Instance = StrawmanInstance;

    fn name(&self) -> &'static str {
        "strawman"
    }

    fn params(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([("lambda".to_string(), self.lambda as u64)])
    }

    fn instantiate(&self, rng: &mut TrialRng) -> Result<StrawmanInstance> {
        if self.lambda == 0 {
            return Err(Error::InvalidParams("lambda must be positive".into()));
        }
        let keys = [SkeKey::generate(self.lambda, rng), SkeKey::generate(self.lambda, rng)];
        let layout = RegisterLayout::new([(BRANCH, 1), (SECRET, self.lambda)])?;
        let amp = Complex64::new(1.0, 0.0);
        let vk = SparseState::from_terms(
            layout,
            [
                (Bits::zeros(1).concat(keys[0].bits()), amp),
                (Bits::ones(1).concat(keys[1].bits()), amp),
            ],
        )?;
        Ok(StrawmanInstance { keys, vk, issued: 0 })
    }
}

impl StrawmanInstance {
    pub fn vk(&self) -> &SparseState {
        &self.vk
    }
}

impl KlaInstance for StrawmanInstance {
    type Ct = StrawmanCt;

    fn msg_bits(&self) -> usize {
        self.keys[0].lambda()
    }

    fn public_encryption(&self) -> bool {
        true
    }

    fn kg(&mut self, _y: &Bits, _rng: &mut TrialRng) -> Result<LeasedKey> {
        self.issued += 1;
        Ok(LeasedKey {
            state: self.vk.clone(),
            ell: 0,
        })
    }

    /// Projective test onto the issued state: passes with probability
    /// `|⟨vk|ψ⟩|²`.
    fn vrfy(&self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool> {
        let Returned::State(state) = returned else {
            return Ok(false);
        };
        if i >= self.issued || state.layout() != self.vk.layout() {
            return Ok(false);
        }
        let overlap = self.vk.inner_product(&state)?.norm_sqr() / state.norm_sqr();
        Ok(rng.gen_bool(overlap.clamp(0.0, 1.0)))
    }

    fn surrender(&self, key: LeasedKey, _rng: &mut TrialRng) -> Result<Returned> {
        Ok(Returned::State(key.state))
    }

    fn enc(&self, _policy: &Bits, m: &Bits, rng: &mut TrialRng) -> Result<StrawmanCt> {
        if m.len() != self.msg_bits() {
            return Err(Error::LengthMismatch {
                expected: self.msg_bits(),
                actual: m.len(),
            });
        }
        Ok(StrawmanCt {
            c0: self.keys[0].encrypt(m, rng),
            c1: self.keys[1].encrypt(m, rng),
        })
    }

    fn dec(&self, key: LeasedKey, ct: &StrawmanCt, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)> {
        let b = key.state.layout().index_of(BRANCH)?;
        let sk = key.state.layout().index_of(SECRET)?;
        let (m, state) = signed::decrypt_coherent(key.state, self.msg_bits(), |view| {
            let c = if view.segment(b).get(0) { &ct.c1 } else { &ct.c0 };
            SkeKey::from_bits(view.segment(sk)).decrypt(c).ok()
        }, rng)?;
        Ok((m, LeasedKey { state, ell: key.ell }))
    }
}

/// Measure-and-copy against the strawman with `q` keys. Returns the
/// verification pass rate, the IND win rate and the full report.
pub fn strawman_collusion_demo(
    lambda: usize,
    q: usize,
    retries: usize,
    opts: &RunOptions,
) -> Result<(f64, f64, GameReport)> {
    let report = run_kla(
        &StrawmanScheme { lambda },
        || MeasureAndCopy::new(retries),
        KlaGame::IndKla,
        q,
        opts,
    )?;
    Ok((report.verify_rate(), report.win_rate(), report))
}
