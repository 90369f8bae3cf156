//! BB84 positions signed with secret pairs.
//!
//! Each position `i` of an SKE-CD ciphertext sits in register `SKECD.CT_i`
//! next to a signature register holding `p_{i,u_i}`, where `(p_{i,0}, p_{i,1})`
//! is a secret pair. A Hadamard-basis position becomes
//! `|0⟩|p_{i,0}⟩ + (−1)^{x[i]}|1⟩|p_{i,1}⟩`, and a Hadamard measurement with
//! outcome `(c_i, d_i)` satisfies `x[i] = c_i ⊕ d_i·(p_{i,0} ⊕ p_{i,1})`.
//! The leasing schemes differ only in where the pairs come from.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prims::{self, Owf};
use crate::qreg::{SimConfig, SparseState, TermView};
use crate::skecd::{SkecdSecretKey, SkecdVerificationKey};

pub fn ct_name(i: usize) -> String {
    format!("SKECD.CT_{}", i + 1)
}

pub fn s_name(i: usize) -> String {
    format!("S_{}", i + 1)
}

/// Signature-register naming for a scheme.
pub type SigName = fn(usize) -> String;

/// `⊗_i` over `SKECD.CT_i ⊗ sig(i)`, laid out as all ciphertext registers
/// followed by all signature registers.
pub fn sign_state(
    vk: &SkecdVerificationKey,
    pairs: &[[Bits; 2]],
    sig: SigName,
    config: SimConfig,
) -> Result<SparseState> {
    let ell = vk.x.len();
    if pairs.len() != ell {
        return Err(Error::Arity {
            expected: ell,
            actual: pairs.len(),
        });
    }
    let mut state = SparseState::prepare_bb84_with(config, &vk.x, &vk.theta, ct_name)?;
    let mut segs = Vec::with_capacity(ell);
    for (i, [p0, p1]) in pairs.iter().enumerate() {
        if p0.len() != p1.len() {
            return Err(Error::LengthMismatch {
                expected: p0.len(),
                actual: p1.len(),
            });
        }
        segs.push((sig(i), p0.len()));
    }
    state.append_segments(&segs)?;
    let cts: Vec<String> = (0..ell).map(ct_name).collect();
    let blocks: Vec<(&str, &str)> = cts
        .iter()
        .zip(&segs)
        .map(|(c, (s, _))| (c.as_str(), s.as_str()))
        .collect();
    state.apply_xor_blocks(&blocks, |i, u| pairs[i][u.get(0) as usize].clone())?;
    Ok(state)
}

/// XORs of the pairs at the Hadamard positions; `None` elsewhere.
pub fn pair_xors(theta: &Bits, pairs: &[[Bits; 2]]) -> Vec<Option<Bits>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, [a, b])| theta.get(i).then(|| a.xor(b)))
        .collect()
}

/// Indices of the ciphertext registers, failing if any is missing.
pub fn ct_indices(state: &SparseState, ell: usize) -> Result<Vec<usize>> {
    (0..ell).map(|i| state.layout().index_of(&ct_name(i))).collect()
}

/// Ciphertext-register substring `u` of one term.
pub fn ct_bits(view: &TermView<'_>, ct_idx: &[usize]) -> Bits {
    Bits::from_bools(ct_idx.iter().map(|&i| view.segment(i).get(0)))
}

fn check_layout(state: &SparseState, names: &[String], widths: &[usize]) -> Result<()> {
    for (n, w) in names.iter().zip(widths) {
        match state.layout().width_of(n) {
            Ok(actual) if actual == *w => {}
            _ => return Err(Error::LayoutMismatch),
        }
    }
    Ok(())
}

/// Hadamard-measures the listed segments. Falls back to measuring in
/// smaller groups when the joint difference space is too large; measuring
/// disjoint groups in sequence gives the same joint distribution.
pub fn measure_hadamard_all<R: Rng + ?Sized>(
    state: SparseState,
    names: &[&str],
    rng: &mut R,
) -> Result<(BTreeMap<String, Bits>, SparseState)> {
    let mut out = BTreeMap::new();
    let mut state = state;
    let mut pending: Vec<Vec<&str>> = vec![names.to_vec()];
    while let Some(group) = pending.pop() {
        if group.is_empty() {
            continue;
        }
        let rank_ok = match state.hadamard_sampler(&group) {
            Ok(_) => true,
            Err(Error::RankExceeded { .. }) if group.len() > 1 => false,
            Err(e) => return Err(e),
        };
        if !rank_ok {
            let (a, b) = group.split_at(group.len() / 2);
            pending.push(b.to_vec());
            pending.push(a.to_vec());
            continue;
        }
        let (outcome, post) = state.measure_hadamard(&group, rng)?;
        for name in &group {
            out.insert(name.to_string(), outcome.segment(name).expect("measured"));
        }
        state = post;
    }
    Ok((out, state))
}

/// Destructive verification: Hadamard-measures every block and checks the
/// parity identity at the Hadamard positions. Positions with `θ = 1` are
/// measured first.
pub fn verify_blocks<R: Rng + ?Sized>(
    state: SparseState,
    x: &Bits,
    theta: &Bits,
    xors: &[Option<Bits>],
    sig: SigName,
    rng: &mut R,
) -> Result<bool> {
    let ell = x.len();
    if theta.len() != ell || xors.len() != ell {
        return Err(Error::LayoutMismatch);
    }
    let cts: Vec<String> = (0..ell).map(ct_name).collect();
    let sigs: Vec<String> = (0..ell).map(sig).collect();
    check_layout(&state, &cts, &vec![1; ell])?;
    for (i, s) in sigs.iter().enumerate() {
        if !state.layout().contains(s) {
            return Err(Error::LayoutMismatch);
        }
        if let Some(xor) = &xors[i] {
            if state.layout().width_of(s)? != xor.len() {
                return Err(Error::LayoutMismatch);
            }
        }
    }
    let (checked, rest): (Vec<usize>, Vec<usize>) = (0..ell).partition(|&i| theta.get(i));
    let mut order: Vec<&str> = Vec::with_capacity(2 * ell);
    for &i in checked.iter().chain(&rest) {
        order.push(&cts[i]);
        order.push(&sigs[i]);
    }
    let (outcomes, _) = measure_hadamard_all(state, &order, rng)?;
    Ok(checked.iter().all(|&i| {
        let c = outcomes[&cts[i]].get(0);
        let d = &outcomes[&sigs[i]];
        let xor = xors[i].as_ref().expect("Hadamard position has a pair xor");
        x.get(i) == (c ^ d.dot(xor))
    }))
}

/// Applies `MSG ⊕= encode(f(u))` where `u` is the ciphertext-register
/// string, measures MSG and drops it.
pub fn decrypt_coherent<R, F>(
    state: SparseState,
    msg_bits: usize,
    f: F,
    rng: &mut R,
) -> Result<(Option<Bits>, SparseState)>
where
    R: Rng + ?Sized,
    F: Fn(&TermView<'_>) -> Option<Bits>,
{
    let mut state = state;
    let msg = "MSG";
    state.append_segment(msg, prims::bottom_width(msg_bits))?;
    let dst = state.layout().index_of(msg)?;
    state.apply_xor_fn(&[dst], |view, out| {
        out.push(prims::encode_bottom(f(view).as_ref(), msg_bits));
    })?;
    let (outcome, mut post) = state.measure_computational(&[msg], rng)?;
    post.discard_definite(msg)?;
    Ok((prims::decode_bottom(&outcome.bits), post))
}

/// Issued key material of an OWF-signed lease.
#[derive(Clone, Debug)]
pub struct SignedKey {
    pub state: SparseState,
    pub ell: usize,
}

/// `(x, θ, {s_{i,0} ⊕ s_{i,1}}_{θ[i]=1})`. Individual preimages never
/// appear here.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedVk {
    pub x: Bits,
    pub theta: Bits,
    pub xors: Vec<Option<Bits>>,
}

/// Testing key `T = t_{1,0} ∥ t_{1,1} ∥ … ∥ t_{ℓ,1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTk {
    owf: Owf,
    images: Vec<[Bits; 2]>,
}

impl SignedTk {
    pub fn ell(&self) -> usize {
        self.images.len()
    }

    pub fn owf(&self) -> Owf {
        self.owf
    }

    pub fn concatenated(&self) -> Bits {
        Bits::concat_all(self.images.iter().flat_map(|p| p.iter()))
    }

    /// `Check[t_{i,0}, t_{i,1}](u_i, v_i)`.
    pub fn check(&self, i: usize, u: bool, v: &Bits) -> bool {
        match self.owf.eval(v) {
            Ok(t) => t == self.images[i][u as usize],
            Err(_) => false,
        }
    }

    /// KeyTest on a classical string `u ∥ v_1 ∥ … ∥ v_ℓ`.
    pub fn test_bits(&self, dk: &Bits) -> bool {
        let ell = self.ell();
        let w = self.owf.input_bits();
        if dk.len() != ell * (1 + w) {
            return false;
        }
        (0..ell).all(|i| self.check(i, dk.get(i), &dk.slice(ell + i * w, w)))
    }

    /// KeyTest on one term, reading the named registers.
    pub fn test_view(&self, view: &TermView<'_>, ct_idx: &[usize], sig_idx: &[usize]) -> bool {
        ct_idx
            .iter()
            .zip(sig_idx)
            .enumerate()
            .all(|(i, (&c, &s))| self.check(i, view.segment(c).get(0), &view.segment(s)))
    }
}

/// Encrypts `payload` under the SKE-CD key and signs every position with
/// fresh OWF preimages of width `sig_bits`.
pub fn issue<R: Rng + ?Sized>(
    skecd: &SkecdSecretKey,
    payload: &Bits,
    owf: Owf,
    config: SimConfig,
    rng: &mut R,
) -> Result<(SignedKey, SignedVk, SignedTk)> {
    let vk = skecd.encrypt_classical(payload, rng)?;
    let ell = vk.x.len();
    let w = owf.input_bits();
    let pairs: Vec<[Bits; 2]> = (0..ell)
        .map(|_| [Bits::random(w, rng), Bits::random(w, rng)])
        .collect();
    let images = pairs
        .iter()
        .map(|[a, b]| Ok([owf.eval(a)?, owf.eval(b)?]))
        .collect::<Result<Vec<_>>>()?;
    let state = sign_state(&vk, &pairs, s_name, config)?;
    let xors = pair_xors(&vk.theta, &pairs);
    Ok((
        SignedKey { state, ell },
        SignedVk {
            x: vk.x,
            theta: vk.theta,
            xors,
        },
        SignedTk { owf, images },
    ))
}

impl SignedKey {
    /// Names of all registers, ciphertext registers first.
    pub fn register_names(&self) -> Vec<String> {
        (0..self.ell).map(ct_name).chain((0..self.ell).map(s_name)).collect()
    }

    pub fn verify<R: Rng + ?Sized>(self, vk: &SignedVk, rng: &mut R) -> Result<bool> {
        verify_blocks(self.state, &vk.x, &vk.theta, &vk.xors, s_name, rng)
    }

    /// Coherent KeyTest into a `KT` ancilla, which is measured and dropped.
    pub fn keytest_coherent<R: Rng + ?Sized>(self, tk: &SignedTk, rng: &mut R) -> Result<(bool, SignedKey)> {
        let ell = self.ell;
        let (bit, state) = keytest_state(self.state, tk, ell, "KT", rng)?;
        Ok((bit, SignedKey { state, ell }))
    }
}

/// Coherent KeyTest on the signed registers of a larger state.
pub fn keytest_state<R: Rng + ?Sized>(
    state: SparseState,
    tk: &SignedTk,
    ell: usize,
    ancilla: &str,
    rng: &mut R,
) -> Result<(bool, SparseState)> {
    if tk.ell() != ell {
        return Err(Error::LayoutMismatch);
    }
    let mut state = state;
    let ct_idx = ct_indices(&state, ell)?;
    let sig_idx: Vec<usize> = (0..ell)
        .map(|i| state.layout().index_of(&s_name(i)))
        .collect::<Result<_>>()
        .map_err(|_| Error::LayoutMismatch)?;
    // honest keys take two values per block, so evaluate f once per value
    let mut memo: Vec<HashMap<(bool, Bits), bool>> = vec![HashMap::new(); ell];
    for (view, _) in state.term_views() {
        for (i, (&c, &s)) in ct_idx.iter().zip(&sig_idx).enumerate() {
            let key = (view.segment(c).get(0), view.segment(s));
            if !memo[i].contains_key(&key) {
                let ok = tk.check(i, key.0, &key.1);
                memo[i].insert(key, ok);
            }
        }
    }
    state.append_segment(ancilla, 1)?;
    let dst = state.layout().index_of(ancilla)?;
    state.apply_xor_fn(&[dst], |view, out| {
        let pass = ct_idx
            .iter()
            .zip(&sig_idx)
            .enumerate()
            .all(|(i, (&c, &s))| memo[i][&(view.segment(c).get(0), view.segment(s))]);
        out.push(Bits::from_u64(pass as u64, 1));
    })?;
    let (outcome, mut post) = state.measure_computational(&[ancilla], rng)?;
    post.discard_definite(ancilla)?;
    Ok((outcome.bits.get(0), post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skecd::{self, SkecdParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(h: usize, rng: &mut ChaCha20Rng) -> SkecdSecretKey {
        let p = SkecdParams {
            lambda: 16,
            n: 6,
            h,
            msg_bits: 8,
        };
        skecd::kg(p, rng).unwrap()
    }

    #[test]
    fn layout_and_term_count() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sk = setup(3, &mut rng);
        let (key, vk, tk) = issue(&sk, &Bits::zeros(8), Owf::new(4, 16), SimConfig::default(), &mut rng).unwrap();
        assert_eq!(key.state.term_count(), 8);
        assert_eq!(key.ell, sk.params().ct_bits());
        let names: Vec<_> = key.state.layout().segments().iter().map(|s| s.name().to_string()).collect();
        assert_eq!(names, key.register_names());
        assert_eq!(vk.xors.iter().filter(|x| x.is_some()).count(), 3);
        assert_eq!(tk.concatenated().len(), key.ell * 2 * 16);
    }

    #[test]
    fn honest_verify_and_keytest() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let sk = setup(3, &mut rng);
        for _ in 0..50 {
            let (key, vk, tk) = issue(&sk, &Bits::ones(8), Owf::new(4, 16), SimConfig::default(), &mut rng).unwrap();
            for (bits, _) in key.state.terms() {
                assert!(tk.test_bits(&bits));
            }
            let (ok, key) = key.keytest_coherent(&tk, &mut rng).unwrap();
            assert!(ok);
            assert!(key.verify(&vk, &mut rng).unwrap());
        }
    }

    #[test]
    fn missing_register_is_layout_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sk = setup(2, &mut rng);
        let (mut key, vk, _) = issue(&sk, &Bits::ones(8), Owf::new(4, 16), SimConfig::default(), &mut rng).unwrap();
        key.state.rename_segment("S_1", "junk").unwrap();
        assert!(matches!(key.verify(&vk, &mut rng), Err(Error::LayoutMismatch)));
    }

    #[test]
    fn split_measurement_when_rank_is_large() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let cfg = SimConfig {
            r_max: 2,
            ..SimConfig::default()
        };
        let s = SparseState::prepare_bb84_with(cfg, &Bits::parse("0101").unwrap(), &Bits::ones(4), |i| format!("q{i}")).unwrap();
        let (out, _) = measure_hadamard_all(s, &["q0", "q1", "q2", "q3"], &mut rng).unwrap();
        let got: Vec<bool> = (0..4).map(|i| out[&format!("q{i}")].get(0)).collect();
        assert_eq!(got, vec![false, true, false, true]);
    }
}
