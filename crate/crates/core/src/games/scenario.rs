//! Named scheme/game/adversary combinations with their pass thresholds.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::adversary::{Honest, MeasureAndCopy, NeverVerify};
use super::challenger::KlaGame;
use super::cvacd::{run_ind_cva_cd, CvaAdversary};
use super::keytest::{run_key_test_experiment, KeyTestAdversary};
use super::schemes::{
    AbeCr2SklScheme, AbeCrSklScheme, KlaInstance, KlaScheme, PkeCrSklScheme, SkeCrSklScheme,
    SkfeCrSklScheme,
};
use super::strawman::StrawmanScheme;
use super::{run_kla, run_trials, Actor, GameReport, GameTranscript, RunOptions, TrialRng, Verdict};
use crate::bits::Bits;
use crate::cr2::Cr2Params;
use crate::error::{Error, Result};
use crate::feskl::{AbeSklParams, SkfeSklParams};
use crate::pkecrskl::PkeParams;
use crate::policy;
use crate::qreg::{states_equal, SimConfig};
use crate::skecd::{self, SkecdParams};
use crate::skecrskl::SkeCrSklParams;

macro_rules! named_enum {
    ($name:ident { $($variant:ident => $id:literal),* $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn id(&self) -> &'static str {
                match self {
                    $($name::$variant => $id),*
                }
            }

            pub fn parse(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| v.id() == s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }
    };
}

named_enum!(SchemeKind {
    Skecd => "skecd",
    SkeCrSkl => "skecrskl",
    PkeCrSkl => "pkecrskl",
    SkfeCrSkl => "skfecrskl",
    AbeCrSkl => "abecrskl",
    AbeCr2Skl => "abecr2skl",
    Strawman => "strawman",
});

named_enum!(GameKind {
    Roundtrip => "roundtrip",
    OtIndKla => "ot-ind-kla",
    IndKla => "ind-kla",
    KeyTest => "key-test",
    IndCvaCd => "ind-cva-cd",
    CollusionDemo => "collusion-demo",
});

named_enum!(AdversaryKind {
    Honest => "honest",
    NeverVerify => "never-verify",
    Colluder => "colluder",
    BitFlip => "bit-flip",
    RandomForger => "random-forger",
    KeepCopy => "keep-copy",
});

/// A pass/fail check on a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Threshold {
    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound: format!(">= {bound}"),
            pass: value >= bound,
        }
    }

    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound: format!("<= {bound}"),
            pass: value <= bound,
        }
    }

    fn within(name: &str, value: f64, centre: f64, radius: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound: format!("{centre} ± {radius}"),
            pass: (value - centre).abs() <= radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub scheme: SchemeKind,
    pub game: GameKind,
    /// `None` picks the game's default adversary.
    pub adversary: Option<AdversaryKind>,
    pub lambda: usize,
    /// Hadamard positions `h`.
    pub h: usize,
    /// Quantum positions `n` of the inner SKE-CD ciphertext.
    pub n: usize,
    /// Keys per trial.
    pub q: usize,
    pub attr_bits: usize,
    /// Verification attempts per key for the measure-and-copy attacker.
    pub retries: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::SkeCrSkl,
            game: GameKind::Roundtrip,
            adversary: None,
            lambda: 128,
            h: 8,
            n: 16,
            q: 2,
            attr_bits: 4,
            retries: 8,
        }
    }
}

impl Scenario {
    pub fn adversary(&self) -> AdversaryKind {
        self.adversary.unwrap_or(match self.game {
            GameKind::KeyTest => AdversaryKind::BitFlip,
            GameKind::CollusionDemo => AdversaryKind::Colluder,
            _ => AdversaryKind::Honest,
        })
    }

    fn has_attributes(&self) -> bool {
        matches!(
            self.scheme,
            SchemeKind::SkfeCrSkl | SchemeKind::AbeCrSkl | SchemeKind::AbeCr2Skl
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let cfg = SimConfig::default();
        if self.lambda == 0 || self.n == 0 || self.q == 0 {
            return bad("lambda, slots and keys must be positive".into());
        }
        if self.h > self.n {
            return bad(format!("h = {} exceeds the {} quantum positions", self.h, self.n));
        }
        if self.h > cfg.r_max {
            return bad(format!("h = {} exceeds r_max = {}", self.h, cfg.r_max));
        }
        if (1usize << self.h).saturating_mul(self.q) > cfg.term_cap {
            return bad(format!("2^h · q exceeds the term cap {}", cfg.term_cap));
        }
        if self.has_attributes() {
            policy::check_attr_bits(self.attr_bits)?;
        }
        use AdversaryKind as A;
        use GameKind as G;
        use SchemeKind as S;
        let scheme_ok = match self.game {
            G::Roundtrip => true,
            G::IndCvaCd => self.scheme == S::Skecd,
            G::KeyTest => self.scheme == S::SkeCrSkl,
            G::OtIndKla | G::IndKla | G::CollusionDemo => self.scheme != S::Skecd,
        };
        if !scheme_ok {
            return bad(format!("game {} is not defined for scheme {}", self.game, self.scheme));
        }
        let adv_ok = match self.game {
            G::Roundtrip => self.adversary() == A::Honest,
            G::OtIndKla | G::IndKla => matches!(self.adversary(), A::Honest | A::NeverVerify | A::Colluder),
            G::CollusionDemo => self.adversary() == A::Colluder,
            G::KeyTest => matches!(self.adversary(), A::Honest | A::BitFlip | A::RandomForger),
            G::IndCvaCd => matches!(self.adversary(), A::Honest | A::NeverVerify | A::KeepCopy),
        };
        if !adv_ok {
            return bad(format!("adversary {} does not play {}", self.adversary(), self.game));
        }
        Ok(())
    }

    fn skecd(&self) -> SkecdParams {
        SkecdParams {
            lambda: self.lambda,
            n: self.n,
            h: self.h,
            msg_bits: self.lambda,
        }
    }

    pub fn run(&self, opts: &RunOptions) -> Result<GameReport> {
        self.validate()?;
        let (l, n, h, a) = (self.lambda, self.n, self.h, self.attr_bits);
        let mut report = match self.scheme {
            SchemeKind::Skecd => match self.game {
                GameKind::Roundtrip => skecd_roundtrip(self.skecd(), opts)?,
                _ => run_ind_cva_cd(self.skecd(), cva_adversary(self.adversary()), opts)?,
            },
            SchemeKind::SkeCrSkl if self.game == GameKind::KeyTest => run_key_test_experiment(
                SkeCrSklParams::new(l, n, h),
                keytest_adversary(self.adversary()),
                self.q,
                opts,
            )?,
            SchemeKind::SkeCrSkl => self.leasing(&SkeCrSklScheme(SkeCrSklParams::new(l, n, h)), opts)?,
            SchemeKind::PkeCrSkl => self.leasing(&PkeCrSklScheme(PkeParams::new(l, n, h)), opts)?,
            SchemeKind::SkfeCrSkl => {
                self.leasing(&SkfeCrSklScheme(SkfeSklParams::new(l, n, h, a, l)), opts)?
            }
            SchemeKind::AbeCrSkl => self.leasing(&AbeCrSklScheme(AbeSklParams::new(l, n, h, a)), opts)?,
            SchemeKind::AbeCr2Skl => self.leasing(&AbeCr2SklScheme(Cr2Params::new(l, n, h, a)), opts)?,
            SchemeKind::Strawman => self.leasing(&StrawmanScheme { lambda: l }, opts)?,
        };
        report.game = self.game.id().to_string();
        Ok(report)
    }

    fn leasing<S: KlaScheme>(&self, scheme: &S, opts: &RunOptions) -> Result<GameReport> {
        let game = match self.game {
            GameKind::Roundtrip => return roundtrip(scheme, self.q, opts),
            GameKind::OtIndKla => KlaGame::OtIndKla,
            _ => KlaGame::IndKla,
        };
        let mut report = match self.adversary() {
            AdversaryKind::Honest => run_kla(scheme, Honest::default, game, self.q, opts)?,
            AdversaryKind::NeverVerify => run_kla(scheme, || NeverVerify, game, self.q, opts)?,
            _ => {
                let mut r = run_kla(scheme, || MeasureAndCopy::new(self.retries), game, self.q, opts)?;
                r.params.insert("retries".to_string(), self.retries as u64);
                r
            }
        };
        report.scheme = scheme.name().to_string();
        Ok(report)
    }

    /// Checks that decide the exit status of a run.
    pub fn thresholds(&self, report: &GameReport) -> Vec<Threshold> {
        use AdversaryKind as A;
        let win = report.win_rate();
        let verify = report.verify_rate();
        match (self.game, self.adversary()) {
            (GameKind::Roundtrip, _) => vec![Threshold::at_least("correct", win, 1.0)],
            (GameKind::KeyTest, _) => vec![Threshold::at_most("forgery", win, 0.0)],
            (_, A::Honest) => vec![Threshold::within("win", win, 0.5, 0.05)],
            (_, A::NeverVerify) => vec![Threshold::at_most("win", win, 0.0)],
            (GameKind::IndCvaCd, _) => {
                vec![Threshold::at_most("verify", verify, 0.5f64.powi(self.h as i32) + 0.02)]
            }
            (_, _) if self.scheme == SchemeKind::Strawman => {
                if self.q >= 4 {
                    vec![
                        Threshold::at_least("verify", verify, 0.99),
                        Threshold::at_least("win", win, 0.98),
                    ]
                } else {
                    Vec::new()
                }
            }
            (_, _) => vec![Threshold::at_most("verify", verify, 0.01)],
        }
    }
}

fn cva_adversary(a: AdversaryKind) -> CvaAdversary {
    match a {
        AdversaryKind::NeverVerify => CvaAdversary::NeverVerify,
        AdversaryKind::KeepCopy => CvaAdversary::KeepCopy,
        _ => CvaAdversary::Honest,
    }
}

fn keytest_adversary(a: AdversaryKind) -> KeyTestAdversary {
    match a {
        AdversaryKind::Honest => KeyTestAdversary::Honest,
        AdversaryKind::RandomForger => KeyTestAdversary::Random,
        _ => KeyTestAdversary::BitFlip,
    }
}

fn rates(report: &mut GameReport, counts: &BTreeMap<&str, usize>) {
    for (name, &k) in counts {
        let r = if report.trials == 0 { 0.0 } else { k as f64 / report.trials as f64 };
        report.pass_rates.insert(name.to_string(), r);
    }
}

/// Per trial: issue `q` keys and for each one decrypt twice, check the key
/// is unchanged, run KeyTest where the scheme has one, and verify the
/// honest return. A trial is a win if every check passes.
fn roundtrip<S: KlaScheme>(scheme: &S, q: usize, opts: &RunOptions) -> Result<GameReport> {
    let outcomes = run_trials(opts, |trial, rng| {
        let mut inst = scheme.instantiate(rng)?;
        let mut t = GameTranscript::new("roundtrip", trial);
        let mut checks = [true; 4];
        for (i, y) in super::adversary::distinct_attributes(q, inst.attr_bits(), rng).iter().enumerate() {
            let key = inst.kg(y, rng)?;
            t.log(Actor::Challenger, "kg", &key.state.digest());
            let [dec_ok, gentle_ok, keytest_ok, verify_ok] = roundtrip_key(&inst, i, y, key, rng)?;
            t.log(Actor::Challenger, "checks", &[dec_ok as u8, gentle_ok as u8, keytest_ok as u8, verify_ok as u8]);
            for (c, ok) in checks.iter_mut().zip([dec_ok, gentle_ok, keytest_ok, verify_ok]) {
                *c &= ok;
            }
        }
        t.passed = checks[3];
        t.v_flags = vec![checks[3]];
        t.verdict = if checks.iter().all(|&c| c) { Verdict::Win } else { Verdict::Lose };
        Ok((t, checks))
    })?;
    let transcripts: Vec<GameTranscript> = outcomes.iter().map(|(t, _)| t.clone()).collect();
    let mut params = scheme.params();
    params.insert("q".to_string(), q as u64);
    let mut report = GameReport::from_transcripts("roundtrip", scheme.name(), "honest", params, opts, &transcripts);
    let mut counts = BTreeMap::new();
    for (k, name) in ["dec", "gentle", "keytest", "verify"].into_iter().enumerate() {
        counts.insert(name, outcomes.iter().filter(|(_, c)| c[k]).count());
    }
    rates(&mut report, &counts);
    Ok(report)
}

fn roundtrip_key<I: KlaInstance>(
    inst: &I,
    i: usize,
    y: &Bits,
    key: super::LeasedKey,
    rng: &mut TrialRng,
) -> Result<[bool; 4]> {
    let m = Bits::random(inst.msg_bits(), rng);
    let attr_bits = inst.attr_bits();
    let allow = if attr_bits == 0 {
        Bits::zeros(0)
    } else {
        policy::allow_only(attr_bits, std::slice::from_ref(y))
    };
    let before = key.state.clone();
    let ct = inst.enc(&allow, &m, rng)?;
    let (out, key) = inst.dec(key, &ct, rng)?;
    let (again, key) = inst.dec(key, &ct, rng)?;
    let mut dec_ok = out.as_ref() == Some(&m) && again.as_ref() == Some(&m);
    let mut key = key;
    if attr_bits > 0 {
        let deny = {
            let mut t = Bits::zeros(policy::table_bits(attr_bits));
            t.set(y.to_u64() as usize, true);
            t
        };
        let ct = inst.enc(&deny, &m, rng)?;
        let (out, k) = inst.dec(key, &ct, rng)?;
        dec_ok &= out.is_none();
        key = k;
    }
    let gentle_ok = states_equal(&before, &key.state, 1e-9)?;
    let (keytest_ok, key) = match inst.keytest(i, key.clone(), rng)? {
        Some((ok, k)) => (ok && states_equal(&before, &k.state, 1e-9)?, k),
        None => (true, key),
    };
    let returned = inst.surrender(key, rng)?;
    let verify_ok = inst.vrfy(i, returned, rng)?;
    Ok([dec_ok, gentle_ok, keytest_ok, verify_ok])
}

fn skecd_roundtrip(params: SkecdParams, opts: &RunOptions) -> Result<GameReport> {
    params.validate()?;
    let outcomes = run_trials(opts, |trial, rng| {
        let mut t = GameTranscript::new("roundtrip", trial);
        let sk = skecd::kg(params, rng)?;
        let m = Bits::random(params.msg_bits, rng);
        let (ct, vk) = sk.enc(&m, rng)?;
        t.log(Actor::Challenger, "enc", &ct.quantum.digest());
        let before = ct.quantum.clone();
        let (out, ct) = sk.dec(ct, rng)?;
        let dec_ok = out.as_ref() == Some(&m);
        let gentle_ok = states_equal(&before, &ct.quantum, 1e-9)?;
        let verify_ok = skecd::vrfy(&vk, &skecd::del(ct, rng)?);
        t.log(Actor::Challenger, "checks", &[dec_ok as u8, gentle_ok as u8, verify_ok as u8]);
        t.passed = verify_ok;
        t.verdict = if dec_ok && gentle_ok && verify_ok { Verdict::Win } else { Verdict::Lose };
        Ok((t, [dec_ok, gentle_ok, verify_ok]))
    })?;
    let transcripts: Vec<GameTranscript> = outcomes.iter().map(|(t, _)| t.clone()).collect();
    let params_map = BTreeMap::from([
        ("lambda".to_string(), params.lambda as u64),
        ("n".to_string(), params.n as u64),
        ("h".to_string(), params.h as u64),
    ]);
    let mut report = GameReport::from_transcripts("roundtrip", "skecd", "honest", params_map, opts, &transcripts);
    let mut counts = BTreeMap::new();
    for (k, name) in ["dec", "gentle", "verify"].into_iter().enumerate() {
        counts.insert(name, outcomes.iter().filter(|(_, c)| c[k]).count());
    }
    rates(&mut report, &counts);
    Ok(report)
}
