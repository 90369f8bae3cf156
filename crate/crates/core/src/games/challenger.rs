//! The challenger of the (OT-)IND-KLA experiments.

use rand::Rng;

use super::adversary::Adversary;
use super::schemes::{KlaInstance, LeasedKey, Returned};
use super::{Actor, GameTranscript, TrialRng, Verdict};
use crate::bits::Bits;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlaGame {
    /// No encryption access before the challenge unless encryption is
    /// public anyway.
    OtIndKla,
    IndKla,
}

impl KlaGame {
    pub fn id(&self) -> &'static str {
        match self {
            Self::OtIndKla => "ot-ind-kla",
            Self::IndKla => "ind-kla",
        }
    }
}

/// Challenger state shared with the adversary through its oracles.
pub struct Challenger<'a, I: KlaInstance> {
    inst: &'a mut I,
    game: KlaGame,
    attrs: Vec<Bits>,
    v: Vec<bool>,
    challenge_policy: Option<Bits>,
    transcript: GameTranscript,
}

fn returned_digest(r: &Returned) -> Vec<u8> {
    match r {
        Returned::State(s) => s.digest().to_vec(),
        Returned::Cert(c) => c.to_json().into_bytes(),
    }
}

impl<'a, I: KlaInstance> Challenger<'a, I> {
    pub fn new(inst: &'a mut I, game: KlaGame, trial: u64) -> Self {
        Self {
            inst,
            game,
            attrs: Vec::new(),
            v: Vec::new(),
            challenge_policy: None,
            transcript: GameTranscript::new(game.id(), trial),
        }
    }

    pub fn instance(&self) -> &I {
        self.inst
    }

    pub fn attributes(&self) -> &[Bits] {
        &self.attrs
    }

    pub fn v_flags(&self) -> &[bool] {
        &self.v
    }

    pub fn log(&mut self, actor: Actor, action: &str, payload: &[u8]) {
        self.transcript.log(actor, action, payload);
    }

    /// Key generation oracle. Returns `None` (⊥) for malformed or repeated
    /// attributes and, after the challenge, for attributes that decrypt
    /// the challenge.
    pub fn key_query(&mut self, y: &Bits, rng: &mut TrialRng) -> Result<Option<LeasedKey>> {
        self.log(Actor::Adversary, "kg-query", &y.to_bytes());
        let attr_bits = self.inst.attr_bits();
        let refused = y.len() != attr_bits
            || (attr_bits > 0 && self.attrs.contains(y))
            || self
                .challenge_policy
                .as_ref()
                .is_some_and(|p| self.inst.decryptable(p, y));
        if refused {
            self.log(Actor::Challenger, "kg-refused", &[]);
            return Ok(None);
        }
        let key = self.inst.kg(y, rng)?;
        self.log(Actor::Challenger, "kg", &key.state.digest());
        self.attrs.push(y.clone());
        self.v.push(false);
        Ok(Some(key))
    }

    /// Verification oracle: sets `V_i := ⊤` on the first accepted return.
    pub fn verify(&mut self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool> {
        let mut payload = (i as u64).to_be_bytes().to_vec();
        payload.extend(returned_digest(&returned));
        self.log(Actor::Adversary, "return", &payload);
        if i >= self.v.len() {
            self.log(Actor::Challenger, "vrfy", &[0]);
            return Ok(false);
        }
        let d = self.inst.vrfy(i, returned, rng)?;
        if d {
            self.v[i] = true;
        }
        self.log(Actor::Challenger, "vrfy", &[d as u8]);
        Ok(d)
    }

    /// Encryption oracle, available in IND-KLA and for public-key schemes.
    pub fn encrypt(&mut self, policy: &Bits, m: &Bits, rng: &mut TrialRng) -> Result<Option<I::Ct>> {
        if self.game == KlaGame::OtIndKla && !self.inst.public_encryption() {
            return Ok(None);
        }
        let mut payload = policy.to_bytes();
        payload.extend(m.to_bytes());
        self.log(Actor::Adversary, "enc-query", &payload);
        Ok(Some(self.inst.enc(policy, m, rng)?))
    }

    fn well_formed(&self, m0: &Bits, m1: &Bits, policy: &Bits) -> bool {
        let w = self.inst.msg_bits();
        m0.len() == w && m1.len() == w && policy.len() == self.inst.policy_bits()
    }

    /// Every key that could decrypt under `policy` has been returned.
    fn gate(&self, policy: &Bits) -> bool {
        self.attrs
            .iter()
            .zip(&self.v)
            .all(|(y, &v)| v || !self.inst.decryptable(policy, y))
    }
}

/// One run of the experiment against a fresh instance.
pub fn play_kla<I, A>(
    mut inst: I,
    adv: &mut A,
    game: KlaGame,
    q: usize,
    trial: u64,
    rng: &mut TrialRng,
) -> Result<GameTranscript>
where
    I: KlaInstance,
    A: Adversary<I>,
{
    let mut ch = Challenger::new(&mut inst, game, trial);
    let attr_bits = ch.inst.attr_bits();
    let ys = adv.attributes(q, attr_bits, rng);
    let mut keys = Vec::with_capacity(ys.len());
    for y in &ys {
        keys.push(ch.key_query(y, rng)?);
    }
    adv.run(keys, &mut ch, rng)?;
    let (m0, m1, policy) = adv.challenge(&ch, rng);
    ch.log(Actor::Adversary, "challenge", &Bits::concat_all([&m0, &m1, &policy]).to_bytes());
    let (verdict, passed) = if !ch.well_formed(&m0, &m1, &policy) || !ch.gate(&policy) {
        ch.log(Actor::Challenger, "abort", &[]);
        (Verdict::Abort, false)
    } else {
        let coin: bool = rng.gen();
        let ct = ch.inst.enc(&policy, if coin { &m1 } else { &m0 }, rng)?;
        ch.challenge_policy = Some(policy);
        ch.log(Actor::Challenger, "challenge-ct", &[]);
        let guess = adv.guess(&ct, &mut ch, rng)?;
        ch.log(Actor::Adversary, "guess", &[guess as u8]);
        (if guess == coin { Verdict::Win } else { Verdict::Lose }, true)
    };
    let mut t = ch.transcript;
    t.verdict = verdict;
    t.passed = passed;
    t.v_flags = ch.v;
    Ok(t)
}
