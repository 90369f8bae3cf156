//! Public-key encryption with collusion-resistant secure key leasing.
//!
//! An SKE-CR-SKL key `Σ_u α_u |u⟩` is turned into
//! `Σ_u α_u |u⟩|ABE.KG(msk, u, k)⟩`. Ciphertexts are ABE ciphertexts under a
//! simulated compute-and-compare program `C̃`, and a key attribute `u`
//! decrypts iff `C̃(u) = ⊥`, which holds for every `u`.

use std::sync::Arc;

use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prims::abe::{self, AbeCiphertext, AbeMsk, AbeParams, AbePk};
use crate::prims::cc::Program;
use crate::prims::{CcHandle, CcParams, CcRegistry};
use crate::qreg::SparseState;
use crate::signed::{self, SignedKey};
use crate::skecrskl::{self, CrSklCt, CrSklMsk, CrSklTk, CrSklVk, SkeCrSklParams};

pub const ABE_SK: &str = "ABE.SK";
pub const SKE_KT: &str = "SKE.KT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PkeParams {
    pub ske: SkeCrSklParams,
    pub msg_bits: usize,
}

impl PkeParams {
    pub fn new(lambda: usize, n: usize, h: usize) -> Self {
        Self {
            ske: SkeCrSklParams::new(lambda, n, h),
            msg_bits: lambda,
        }
    }

    pub fn lambda(&self) -> usize {
        self.ske.skecd.lambda
    }

    /// Width of the SKE.DK register: `ℓ_ct` ciphertext bits plus the `S_i`.
    pub fn ske_dk_bits(&self) -> usize {
        self.ske.ell() * (1 + self.ske.sig_bits)
    }

    /// `pp_D`: input width, output width `λ`, size bound 0.
    pub fn pp_d(&self) -> CcParams {
        CcParams {
            input_bits: self.ske_dk_bits(),
            output_bits: self.lambda(),
            size: 0,
        }
    }

    fn abe_params(&self) -> AbeParams {
        AbeParams {
            lambda: self.lambda(),
            attr_bits: self.ske_dk_bits(),
            rand_bits: self.lambda(),
            msg_bits: self.msg_bits,
        }
    }
}

/// Indices of the inner key registers, in layout order.
pub(crate) fn inner_indices(state: &SparseState, ell: usize) -> Result<Vec<usize>> {
    (0..ell)
        .map(signed::ct_name)
        .chain((0..ell).map(signed::s_name))
        .map(|n| state.layout().index_of(&n).map_err(|_| Error::LayoutMismatch))
        .collect()
}

/// `ABE.SK ⊕= ABE.KG(msk, prefix ∥ u, k)` with `u` read from the inner key
/// registers.
pub(crate) fn xor_abe_key<X>(
    state: &mut SparseState,
    inner: &[usize],
    msk: &AbeMsk<X>,
    prefix: &Bits,
    k: &Bits,
) -> Result<()> {
    let dst = state.layout().index_of(ABE_SK).map_err(|_| Error::LayoutMismatch)?;
    let p = msk.params();
    let inner_bits: usize = inner
        .iter()
        .map(|&i| state.layout().segments()[i].width())
        .sum();
    if prefix.len() + inner_bits != p.attr_bits || state.layout().segments()[dst].width() != p.token_bits() {
        return Err(Error::LayoutMismatch);
    }
    state.apply_xor_fn(&[dst], |view, out| {
        let attr = prefix.concat(&view.concat(inner));
        out.push(msk.kg(&attr, k).expect("attribute width checked"));
    })
}

/// Coherent `MSG ⊕= ABE.Dec(ABE.SK, ct)`, measured and dropped.
pub(crate) fn abe_decrypt_coherent<X, R: Rng + ?Sized>(
    state: SparseState,
    ct: &AbeCiphertext<X>,
    rng: &mut R,
) -> Result<(Option<Bits>, SparseState)> {
    let src = state.layout().index_of(ABE_SK).map_err(|_| Error::LayoutMismatch)?;
    signed::decrypt_coherent(state, ct.params().msg_bits, |view| ct.dec(&view.segment(src)), rng)
}

/// Verification of a layered key: coherent KeyTest on the inner registers,
/// uncompute of ABE.SK, trace-out of ABE.SK, then inner verification.
#[allow(clippy::too_many_arguments)]
pub(crate) fn layered_verify<X, R: Rng + ?Sized>(
    state: SparseState,
    ell: usize,
    abe_msk: &AbeMsk<X>,
    prefix: &Bits,
    k: &Bits,
    ske_vk: &CrSklVk,
    ske_tk: &CrSklTk,
    rng: &mut R,
) -> Result<bool> {
    let (pass, state) = signed::keytest_state(state, ske_tk, ell, SKE_KT, rng)?;
    if !pass {
        return Ok(false);
    }
    let mut state = state;
    let inner = inner_indices(&state, ell)?;
    xor_abe_key(&mut state, &inner, abe_msk, prefix, k)?;
    let state = state.trace_out(ABE_SK, rng)?;
    skecrskl::vrfy(ske_vk, SignedKey { state, ell }, rng)
}

#[derive(Clone, Debug)]
pub struct PkeEk {
    abe: AbePk<CcHandle>,
    registry: Arc<CcRegistry>,
    pp_d: CcParams,
}

#[derive(Clone, Debug)]
pub struct PkeMsk {
    abe: AbeMsk<CcHandle>,
    ske: CrSklMsk,
    params: PkeParams,
}

#[derive(Clone, Debug)]
pub struct PkeDk {
    pub state: SparseState,
    pub ell: usize,
}

#[derive(Clone, Debug)]
pub struct PkeVk {
    abe_msk: AbeMsk<CcHandle>,
    pub ske_vk: CrSklVk,
    pub ske_tk: CrSklTk,
    pub k: Bits,
}

#[derive(Clone, Debug)]
pub struct PkeCt {
    pub abe: AbeCiphertext<CcHandle>,
}

/// Sets up with a fresh compute-and-compare registry.
pub fn setup<R: Rng + ?Sized>(params: PkeParams, rng: &mut R) -> Result<(PkeEk, PkeMsk)> {
    setup_with_registry(params, Arc::new(CcRegistry::new()), rng)
}

pub fn setup_with_registry<R: Rng + ?Sized>(
    params: PkeParams,
    registry: Arc<CcRegistry>,
    rng: &mut R,
) -> Result<(PkeEk, PkeMsk)> {
    params.ske.validate()?;
    let reg = Arc::clone(&registry);
    // decryptable iff C̃(u) = ⊥
    let relation: abe::Relation<CcHandle> =
        Arc::new(move |c: &CcHandle, u: &Bits| matches!(reg.eval(*c, u), Ok(None)));
    let (pk, abe_msk) = abe::setup(params.abe_params(), relation, rng);
    let ske = skecrskl::setup(params.ske, rng)?;
    Ok((
        PkeEk {
            abe: pk,
            registry,
            pp_d: params.pp_d(),
        },
        PkeMsk {
            abe: abe_msk,
            ske,
            params,
        },
    ))
}

impl PkeMsk {
    pub fn params(&self) -> PkeParams {
        self.params
    }

    pub fn ske(&self) -> &CrSklMsk {
        &self.ske
    }
}

impl PkeEk {
    pub fn registry(&self) -> &Arc<CcRegistry> {
        &self.registry
    }

    pub fn msg_bits(&self) -> usize {
        self.abe.params().msg_bits
    }
}

impl PkeVk {
    /// The ABE master key held by the verifier.
    pub fn abe_msk(&self) -> &AbeMsk<CcHandle> {
        &self.abe_msk
    }
}

pub fn kg<R: Rng + ?Sized>(msk: &PkeMsk, rng: &mut R) -> Result<(PkeDk, PkeVk)> {
    let (ske_dk, ske_vk, ske_tk) = skecrskl::kg(&msk.ske, rng)?;
    let k = Bits::random(msk.params.lambda(), rng);
    let ell = ske_dk.ell;
    let mut state = ske_dk.state;
    state.append_segment(ABE_SK, msk.abe.params().token_bits())?;
    let inner = inner_indices(&state, ell)?;
    xor_abe_key(&mut state, &inner, &msk.abe, &Bits::zeros(0), &k)?;
    Ok((
        PkeDk { state, ell },
        PkeVk {
            abe_msk: msk.abe.clone(),
            ske_vk,
            ske_tk,
            k,
        },
    ))
}

pub fn enc(ek: &PkeEk, m: &Bits) -> Result<PkeCt> {
    let c = ek.registry.simulate(ek.pp_d);
    Ok(PkeCt {
        abe: ek.abe.enc(c, m)?,
    })
}

pub fn dec<R: Rng + ?Sized>(dk: PkeDk, ct: &PkeCt, rng: &mut R) -> Result<(Option<Bits>, PkeDk)> {
    let ell = dk.ell;
    let (m, state) = abe_decrypt_coherent(dk.state, &ct.abe, rng)?;
    Ok((m, PkeDk { state, ell }))
}

pub fn vrfy<R: Rng + ?Sized>(vk: &PkeVk, dk: PkeDk, rng: &mut R) -> Result<bool> {
    layered_verify(
        dk.state,
        dk.ell,
        &vk.abe_msk,
        &Bits::zeros(0),
        &vk.k,
        &vk.ske_vk,
        &vk.ske_tk,
        rng,
    )
}

/// The uncompute step of verification on its own: returns the state with
/// ABE.SK XOR-ed with `ABE.KG(msk, u, k)` again.
pub fn uncompute(vk: &PkeVk, dk: &PkeDk) -> Result<SparseState> {
    let mut state = dk.state.clone();
    let inner = inner_indices(&state, dk.ell)?;
    xor_abe_key(&mut state, &inner, &vk.abe_msk, &Bits::zeros(0), &vk.k)?;
    Ok(state)
}

/// Circuit `D` of the security argument: `u ↦ SKE-CR-SKL.CDec(u, ct*)`,
/// all-zero on failure.
pub fn circuit_d(ct: CrSklCt) -> Program {
    Arc::new(move |u: &Bits| {
        skecrskl::cdec(u, &ct).unwrap_or_else(|_| Bits::zeros(ct.z.len()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qreg::states_equal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params(h: usize) -> PkeParams {
        PkeParams::new(16, 5, h)
    }

    #[test]
    fn abe_sk_matches_kg_on_every_term() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (_, msk) = setup(params(3), &mut rng).unwrap();
        let (dk, vk) = kg(&msk, &mut rng).unwrap();
        assert_eq!(dk.state.term_count(), 8);
        let inner = inner_indices(&dk.state, dk.ell).unwrap();
        let abe_idx = dk.state.layout().index_of(ABE_SK).unwrap();
        for (view, _) in dk.state.term_views() {
            let u = view.concat(&inner);
            assert_eq!(view.segment(abe_idx), vk.abe_msk().kg(&u, &vk.k).unwrap());
        }
    }

    #[test]
    fn uncompute_zeroes_abe_sk() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, msk) = setup(params(3), &mut rng).unwrap();
        let (dk, vk) = kg(&msk, &mut rng).unwrap();
        let state = uncompute(&vk, &dk).unwrap();
        let zeros = state.segment_values(ABE_SK).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!(zeros.iter().next().unwrap().is_zero());
    }

    #[test]
    fn simulated_policy_is_always_bottom() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (ek, _) = setup(params(1), &mut rng).unwrap();
        let ct = enc(&ek, &Bits::zeros(16)).unwrap();
        let ct2 = enc(&ek, &Bits::zeros(16)).unwrap();
        assert_ne!(ct.abe.attribute(), ct2.abe.attribute());
        let w = params(1).ske_dk_bits();
        for _ in 0..1000 {
            let u = Bits::random(w, &mut rng);
            assert_eq!(ek.registry().eval(*ct.abe.attribute(), &u).unwrap(), None);
        }
    }

    #[test]
    fn round_trip_gentle_and_verifiable() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (ek, msk) = setup(params(3), &mut rng).unwrap();
        let (dk, vk) = kg(&msk, &mut rng).unwrap();
        let m = Bits::random(16, &mut rng);
        let ct = enc(&ek, &m).unwrap();
        let before = dk.state.clone();
        let (out, dk) = dec(dk, &ct, &mut rng).unwrap();
        assert_eq!(out, Some(m));
        assert!(states_equal(&before, &dk.state, 1e-9).unwrap());
        assert!(vrfy(&vk, dk, &mut rng).unwrap());
    }

    #[test]
    fn foreign_key_decrypts_to_bottom() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (ek, _) = setup(params(2), &mut rng).unwrap();
        let (_, other) = setup(params(2), &mut rng).unwrap();
        let (dk, _) = kg(&other, &mut rng).unwrap();
        let ct = enc(&ek, &Bits::ones(16)).unwrap();
        assert_eq!(dec(dk, &ct, &mut rng).unwrap().0, None);
    }

    #[test]
    fn circuit_d_decrypts_support_strings() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (_, msk) = setup(params(2), &mut rng).unwrap();
        let (dk, _) = kg(&msk, &mut rng).unwrap();
        let m = Bits::random(16, &mut rng);
        let d = circuit_d(skecrskl::enc(msk.ske(), &m).unwrap());
        let inner = inner_indices(&dk.state, dk.ell).unwrap();
        let (view, _) = dk.state.term_views().next().unwrap();
        assert_eq!(d(&view.concat(&inner)), m);
    }
}
