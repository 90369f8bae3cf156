//! Key-testability experiment: the adversary wins if it outputs a
//! classical key string that passes KeyTest yet decrypts wrongly.

use rand::Rng;

use super::schemes::{KlaScheme, SkeCrSklScheme};
use super::{run_trials, Actor, GameReport, GameTranscript, RunOptions, TrialRng, Verdict};
use crate::bits::Bits;
use crate::error::Result;
use crate::qreg::SparseState;
use crate::skecrskl::{self, SkeCrSklParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyTestAdversary {
    /// Measures a key and submits the outcome.
    Honest,
    /// Measures a key and flips one random bit.
    BitFlip,
    /// Submits a uniformly random string.
    Random,
}

impl KeyTestAdversary {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Honest => "honest",
            Self::BitFlip => "bit-flip",
            Self::Random => "random-forger",
        }
    }

    fn forge(&self, keys: Vec<SparseState>, rng: &mut TrialRng) -> Result<(usize, Bits)> {
        let k = rng.gen_range(0..keys.len());
        let key = keys.into_iter().nth(k).expect("index in range");
        let width = key.layout().total_bits();
        if *self == Self::Random {
            return Ok((k, Bits::random(width, rng)));
        }
        let names: Vec<String> = key.layout().segments().iter().map(|s| s.name().to_string()).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let (outcome, _) = key.measure_computational(&refs, rng)?;
        let mut s = outcome.bits;
        if *self == Self::BitFlip {
            s.flip(rng.gen_range(0..width));
        }
        Ok((k, s))
    }
}

/// Runs the experiment against SKE-CR-SKL with `q` keys per trial. A win
/// is a forgery; the `verify` rate is how often KeyTest accepted.
pub fn run_key_test_experiment(
    params: SkeCrSklParams,
    adv: KeyTestAdversary,
    q: usize,
    opts: &RunOptions,
) -> Result<GameReport> {
    let transcripts = run_trials(opts, |trial, rng| {
        let mut t = GameTranscript::new("key-test", trial);
        let msk = skecrskl::setup(params, rng)?;
        let mut keys = Vec::with_capacity(q);
        let mut tks = Vec::with_capacity(q);
        for _ in 0..q.max(1) {
            let (dk, _, tk) = skecrskl::kg(&msk, rng)?;
            t.log(Actor::Challenger, "kg", &dk.state.digest());
            keys.push(dk.state);
            tks.push(tk);
        }
        let (k, s) = adv.forge(keys, rng)?;
        let m = Bits::random(params.msg_bits(), rng);
        let mut payload = (k as u64).to_be_bytes().to_vec();
        payload.extend(s.to_bytes());
        payload.extend(m.to_bytes());
        t.log(Actor::Adversary, "forgery", &payload);
        let ct = skecrskl::enc(&msk, &m)?;
        t.passed = skecrskl::keytest(&tks[k], &s);
        let wrong = skecrskl::cdec(&s, &ct).map_or(true, |out| out != m);
        t.verdict = if t.passed && wrong { Verdict::Win } else { Verdict::Lose };
        t.log(Actor::Challenger, "verdict", &[t.passed as u8, wrong as u8]);
        Ok(t)
    })?;
    let mut p = SkeCrSklScheme(params).params();
    p.insert("q".to_string(), q as u64);
    Ok(GameReport::from_transcripts("key-test", "skecrskl", adv.id(), p, opts, &transcripts))
}
