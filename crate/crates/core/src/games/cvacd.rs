//! IND-CVA-CD for the BB84 SKE-CD scheme: the secret key is released once
//! a deletion certificate verifies, and the adversary's guess only counts
//! if that happened.

use std::collections::BTreeMap;

use rand::Rng;

use super::{run_trials, Actor, GameReport, GameTranscript, RunOptions, TrialRng, Verdict};
use crate::bits::Bits;
use crate::error::Result;
use crate::skecd::{self, DeletionCertificate, SkecdCiphertext, SkecdParams, SkecdSecretKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvaAdversary {
    /// Deletes honestly, then guesses at random.
    Honest,
    /// Keeps the ciphertext and never submits a certificate.
    NeverVerify,
    /// Measures the ciphertext computationally, submits the outcome as the
    /// certificate and decrypts the kept copy if the key is released.
    KeepCopy,
}

impl CvaAdversary {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Honest => "honest",
            Self::NeverVerify => "never-verify",
            Self::KeepCopy => "keep-copy",
        }
    }
}

struct Oracle<'a> {
    vk: &'a skecd::SkecdVerificationKey,
    sk: &'a SkecdSecretKey,
    released: bool,
}

impl Oracle<'_> {
    fn submit(&mut self, cert: &DeletionCertificate, t: &mut GameTranscript) -> Option<&SkecdSecretKey> {
        t.log(Actor::Adversary, "cert", &cert.0.to_bytes());
        let ok = skecd::vrfy(self.vk, cert);
        t.log(Actor::Challenger, "vrfy", &[ok as u8]);
        self.released |= ok;
        ok.then_some(self.sk)
    }
}

fn play(
    adv: CvaAdversary,
    ct: SkecdCiphertext,
    m: [&Bits; 2],
    oracle: &mut Oracle<'_>,
    t: &mut GameTranscript,
    rng: &mut TrialRng,
) -> Result<bool> {
    match adv {
        CvaAdversary::NeverVerify => Ok(rng.gen()),
        CvaAdversary::Honest => {
            let cert = skecd::del(ct, rng)?;
            oracle.submit(&cert, t);
            Ok(rng.gen())
        }
        CvaAdversary::KeepCopy => {
            let names: Vec<String> = ct.quantum.layout().segments().iter().map(|s| s.name().to_string()).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let (outcome, _) = ct.quantum.measure_computational(&refs, rng)?;
            let copy = outcome.bits.concat(&ct.classical);
            let Some(sk) = oracle.submit(&DeletionCertificate(copy.clone()), t) else {
                return Ok(rng.gen());
            };
            Ok(match sk.cdec(&copy) {
                Ok(out) if &out == m[1] => true,
                Ok(out) if &out == m[0] => false,
                _ => rng.gen(),
            })
        }
    }
}

pub fn run_ind_cva_cd(params: SkecdParams, adv: CvaAdversary, opts: &RunOptions) -> Result<GameReport> {
    params.validate()?;
    let transcripts = run_trials(opts, |trial, rng| {
        let mut t = GameTranscript::new("ind-cva-cd", trial);
        let sk = skecd::kg(params, rng)?;
        let m0 = Bits::random(params.msg_bits, rng);
        let mut m1 = Bits::random(params.msg_bits, rng);
        if m1 == m0 {
            m1.flip(0);
        }
        t.log(Actor::Adversary, "challenge", &m0.concat(&m1).to_bytes());
        let coin: bool = rng.gen();
        let (ct, vk) = sk.enc(if coin { &m1 } else { &m0 }, rng)?;
        t.log(Actor::Challenger, "challenge-ct", &ct.quantum.digest());
        let mut oracle = Oracle {
            vk: &vk,
            sk: &sk,
            released: false,
        };
        let guess = play(adv, ct, [&m0, &m1], &mut oracle, &mut t, rng)?;
        t.log(Actor::Adversary, "guess", &[guess as u8]);
        t.passed = oracle.released;
        t.v_flags = vec![oracle.released];
        t.verdict = match (oracle.released, guess == coin) {
            (false, _) => Verdict::Abort,
            (true, true) => Verdict::Win,
            (true, false) => Verdict::Lose,
        };
        Ok(t)
    })?;
    let params_map = BTreeMap::from([
        ("lambda".to_string(), params.lambda as u64),
        ("n".to_string(), params.n as u64),
        ("h".to_string(), params.h as u64),
    ]);
    Ok(GameReport::from_transcripts("ind-cva-cd", "skecd", adv.id(), params_map, opts, &transcripts))
}
