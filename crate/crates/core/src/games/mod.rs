//! Security experiments, built-in adversaries and the strawman scheme.
//!
//! Every trial owns its schemes, states and a ChaCha20 stream seeded with
//! `SHA-256(seed ∥ trial)`, so reports depend only on the master seed.

mod adversary;
mod challenger;
mod cvacd;
mod keytest;
mod scenario;
mod schemes;
mod strawman;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use adversary::{Adversary, Honest, MeasureAndCopy, NeverVerify};
pub use challenger::{play_kla, Challenger, KlaGame};
pub use cvacd::{run_ind_cva_cd, CvaAdversary};
pub use keytest::{run_key_test_experiment, KeyTestAdversary};
pub use scenario::{AdversaryKind, GameKind, Scenario, SchemeKind};
pub use schemes::{
    AbeCr2SklScheme, AbeCrSklScheme, KlaInstance, KlaScheme, LeasedKey, PkeCrSklScheme, Returned,
    SkeCrSklScheme, SkfeCrSklScheme,
};
pub use strawman::{strawman_collusion_demo, StrawmanCt, StrawmanInstance, StrawmanScheme};

pub type TrialRng = ChaCha20Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut h = Sha256::new();
    h.update(seed.to_be_bytes());
    h.update(trial.to_be_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            threads: None,
        }
    }
}

/// Runs `f` once per trial and returns the results in trial order.
pub fn run_trials<T, F>(opts: &RunOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut TrialRng) -> Result<T> + Sync,
{
    let work = || {
        (0..opts.trials as u64)
            .into_par_iter()
            .map(|i| f(i, &mut trial_rng(opts.seed, i)))
            .collect::<Result<Vec<T>>>()
    };
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson95(successes: usize, n: usize) -> [f64; 2] {
    if n == 0 {
        return [0.0, 1.0];
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Challenger,
    Adversary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub actor: Actor,
    pub action: String,
    /// First 8 bytes of SHA-256 of the payload, hex.
    pub digest: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Win,
    Lose,
    Abort,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub game: String,
    pub trial: u64,
    pub events: Vec<Event>,
    pub verdict: Verdict,
    pub v_flags: Vec<bool>,
    /// Whether the game's verification gate was passed.
    pub passed: bool,
}

impl GameTranscript {
    pub fn new(game: &str, trial: u64) -> Self {
        Self {
            game: game.to_string(),
            trial,
            events: Vec::new(),
            verdict: Verdict::Lose,
            v_flags: Vec::new(),
            passed: false,
        }
    }

    pub fn log(&mut self, actor: Actor, action: &str, payload: &[u8]) {
        let d = Sha256::digest(payload);
        self.events.push(Event {
            actor,
            action: action.to_string(),
            digest: hex::encode(&d[..8]),
        });
    }

    pub fn won(&self) -> bool {
        self.verdict == Verdict::Win
    }
}

/// Aggregated result of a batch of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub game: String,
    pub scheme: String,
    pub adversary: String,
    pub params: BTreeMap<String, u64>,
    pub seed: u64,
    pub trials: usize,
    pub wins: usize,
    pub pass_rates: BTreeMap<String, f64>,
    pub ci95: [f64; 2],
    /// SHA-256 over the JSON of every trial transcript, in trial order.
    pub transcript_digest: String,
}

impl GameReport {
    pub fn from_transcripts(
        game: &str,
        scheme: &str,
        adversary: &str,
        params: BTreeMap<String, u64>,
        opts: &RunOptions,
        transcripts: &[GameTranscript],
    ) -> Self {
        let trials = transcripts.len();
        let wins = transcripts.iter().filter(|t| t.won()).count();
        let passed = transcripts.iter().filter(|t| t.passed).count();
        let aborted = transcripts.iter().filter(|t| t.verdict == Verdict::Abort).count();
        let rate = |k: usize| if trials == 0 { 0.0 } else { k as f64 / trials as f64 };
        let mut pass_rates = BTreeMap::new();
        pass_rates.insert("win".to_string(), rate(wins));
        pass_rates.insert("verify".to_string(), rate(passed));
        pass_rates.insert("abort".to_string(), rate(aborted));
        let mut h = Sha256::new();
        for t in transcripts {
            h.update(serde_json::to_vec(t).expect("transcript serializes"));
        }
        Self {
            game: game.to_string(),
            scheme: scheme.to_string(),
            adversary: adversary.to_string(),
            params,
            seed: opts.seed,
            trials,
            wins,
            pass_rates,
            ci95: wilson95(wins, trials),
            transcript_digest: hex::encode(h.finalize()),
        }
    }

    pub fn win_rate(&self) -> f64 {
        self.rate("win")
    }

    pub fn verify_rate(&self) -> f64 {
        self.rate("verify")
    }

    pub fn rate(&self, name: &str) -> f64 {
        self.pass_rates.get(name).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs a KLA experiment with a fresh instance and adversary per trial.
pub fn run_kla<S, A, F>(scheme: &S, make_adv: F, game: KlaGame, q: usize, opts: &RunOptions) -> Result<GameReport>
where
    S: KlaScheme,
    A: Adversary<S::Instance>,
    F: Fn() -> A + Sync,
{
    let adv_name = <A as Adversary<S::Instance>>::name(&make_adv());
    let transcripts = run_trials(opts, |i, rng| {
        let inst = scheme.instantiate(rng)?;
        play_kla(inst, &mut make_adv(), game, q, i, rng)
    })?;
    let mut params = scheme.params();
    params.insert("q".to_string(), q as u64);
    Ok(GameReport::from_transcripts(game.id(), scheme.name(), adv_name, params, opts, &transcripts))
}
