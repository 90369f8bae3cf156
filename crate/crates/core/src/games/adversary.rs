//! Built-in adversaries for the KLA experiments.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use super::challenger::Challenger;
use super::schemes::{KlaInstance, LeasedKey};
use super::{Actor, TrialRng};
use crate::bits::Bits;
use crate::error::Result;
use crate::policy;
use crate::qreg::SparseState;

/// A (classically simulated) adversary. Callbacks run in order:
/// `attributes`, `run`, `challenge`, `guess`.
pub trait Adversary<I: KlaInstance> {
    fn name(&self) -> &'static str;

    /// Key attributes to request up front.
    fn attributes(&mut self, q: usize, attr_bits: usize, rng: &mut TrialRng) -> Vec<Bits> {
        distinct_attributes(q, attr_bits, rng)
    }

    /// Receives the keys (`None` where the query was refused) and may use
    /// the verification and encryption oracles.
    fn run(&mut self, keys: Vec<Option<LeasedKey>>, ch: &mut Challenger<'_, I>, rng: &mut TrialRng) -> Result<()>;

    /// `(m₀, m₁, policy)`.
    fn challenge(&mut self, ch: &Challenger<'_, I>, rng: &mut TrialRng) -> (Bits, Bits, Bits) {
        default_challenge(ch, rng)
    }

    fn guess(&mut self, _ct: &I::Ct, _ch: &mut Challenger<'_, I>, rng: &mut TrialRng) -> Result<bool> {
        Ok(rng.gen())
    }
}

/// `q` distinct attributes, or `q` empty ones when there are no attributes.
pub fn distinct_attributes(q: usize, attr_bits: usize, rng: &mut TrialRng) -> Vec<Bits> {
    if attr_bits == 0 {
        return vec![Bits::zeros(0); q];
    }
    let space = 1usize << attr_bits;
    sample(rng, space, q.min(space))
        .into_iter()
        .map(|v| Bits::from_u64(v as u64, attr_bits))
        .collect()
}

/// Two distinct random messages and a policy every issued key satisfies.
pub fn default_challenge<I: KlaInstance>(ch: &Challenger<'_, I>, rng: &mut TrialRng) -> (Bits, Bits, Bits) {
    let w = ch.instance().msg_bits();
    let m0 = Bits::random(w, rng);
    let mut m1 = Bits::random(w, rng);
    if m1 == m0 {
        m1.flip(0);
    }
    let attr_bits = ch.instance().attr_bits();
    let policy = if attr_bits == 0 {
        Bits::zeros(0)
    } else {
        policy::allow_only(attr_bits, ch.attributes())
    };
    (m0, m1, policy)
}

/// Uses its keys honestly (decrypting oracle ciphertexts when it can),
/// returns them all and guesses at random.
#[derive(Clone, Debug, Default)]
pub struct Honest {
    /// Decryptions of oracle ciphertexts that came out wrong.
    pub decryption_errors: usize,
}

impl<I: KlaInstance> Adversary<I> for Honest {
    fn name(&self) -> &'static str {
        "honest"
    }

    fn run(&mut self, keys: Vec<Option<LeasedKey>>, ch: &mut Challenger<'_, I>, rng: &mut TrialRng) -> Result<()> {
        let attr_bits = ch.instance().attr_bits();
        for (i, key) in keys.into_iter().enumerate() {
            let Some(mut key) = key else { continue };
            let policy = match attr_bits {
                0 => Bits::zeros(0),
                w => policy::allow_only(w, &ch.attributes()[i..=i]),
            };
            let m = Bits::random(ch.instance().msg_bits(), rng);
            if let Some(ct) = ch.encrypt(&policy, &m, rng)? {
                let (out, k) = ch.instance().dec(key, &ct, rng)?;
                self.decryption_errors += (out.as_ref() != Some(&m)) as usize;
                key = k;
            }
            let returned = ch.instance().surrender(key, rng)?;
            ch.verify(i, returned, rng)?;
        }
        Ok(())
    }
}

/// Keeps every key and never asks for verification.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeverVerify;

impl<I: KlaInstance> Adversary<I> for NeverVerify {
    fn name(&self) -> &'static str {
        "never-verify"
    }

    fn run(&mut self, _keys: Vec<Option<LeasedKey>>, _ch: &mut Challenger<'_, I>, _rng: &mut TrialRng) -> Result<()> {
        Ok(())
    }
}

/// Measures every key in the computational basis, pools the observed
/// strings across all keys, and returns the uniform superposition of the
/// pool for each key, retrying up to `retries` times. It then decrypts the
/// challenge with a measured copy.
#[derive(Clone, Debug)]
pub struct MeasureAndCopy {
    pub retries: usize,
    copies: Vec<LeasedKey>,
    challenge: Option<(Bits, Bits)>,
}

impl MeasureAndCopy {
    pub fn new(retries: usize) -> Self {
        Self {
            retries: retries.max(1),
            copies: Vec::new(),
            challenge: None,
        }
    }
}

fn segment_names(state: &SparseState) -> Vec<String> {
    state.layout().segments().iter().map(|s| s.name().to_string()).collect()
}

impl<I: KlaInstance> Adversary<I> for MeasureAndCopy {
    fn name(&self) -> &'static str {
        "colluder"
    }

    fn run(&mut self, keys: Vec<Option<LeasedKey>>, ch: &mut Challenger<'_, I>, rng: &mut TrialRng) -> Result<()> {
        let mut pool = BTreeSet::new();
        let mut slots = Vec::new();
        for (i, key) in keys.into_iter().enumerate() {
            let Some(key) = key else { continue };
            let names = segment_names(&key.state);
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let (outcome, post) = key.state.measure_computational(&refs, rng)?;
            ch.log(Actor::Adversary, "measure", &outcome.bits.to_bytes());
            pool.insert(outcome.bits);
            self.copies.push(LeasedKey {
                state: post,
                ell: key.ell,
            });
            slots.push(i);
        }
        for (copy, i) in self.copies.iter().zip(slots) {
            let layout = copy.state.layout().clone();
            let width = layout.total_bits();
            let terms: Vec<(Bits, Complex64)> = pool
                .iter()
                .filter(|s| s.len() == width)
                .map(|s| (s.clone(), Complex64::new(1.0, 0.0)))
                .collect();
            for _ in 0..self.retries {
                let forged = SparseState::from_terms(layout.clone(), terms.iter().cloned())?;
                let returned = ch.instance().surrender(
                    LeasedKey {
                        state: forged,
                        ell: copy.ell,
                    },
                    rng,
                )?;
                if ch.verify(i, returned, rng)? {
                    break;
                }
            }
        }
        Ok(())
    }

    fn challenge(&mut self, ch: &Challenger<'_, I>, rng: &mut TrialRng) -> (Bits, Bits, Bits) {
        let (m0, m1, policy) = default_challenge(ch, rng);
        self.challenge = Some((m0.clone(), m1.clone()));
        (m0, m1, policy)
    }

    fn guess(&mut self, ct: &I::Ct, ch: &mut Challenger<'_, I>, rng: &mut TrialRng) -> Result<bool> {
        let (Some(copy), Some((m0, m1))) = (self.copies.first(), &self.challenge) else {
            return Ok(rng.gen());
        };
        let (out, _) = ch.instance().dec(copy.clone(), ct, rng)?;
        Ok(match out {
            Some(m) if &m == m0 => false,
            Some(m) if &m == m1 => true,
            _ => rng.gen(),
        })
    }
}
