//! Functional and attribute-based encryption with collusion-resistant
//! secure key leasing.
//!
//! SKFE-CR-SKL wraps an SKFE key token in a signed SKE-CD ciphertext, the
//! same way SKE-CR-SKL wraps `r`. ABE-CR-SKL layers ABE keys for `y ∥ u`
//! over an SKFE-CR-SKL key `Σ_u α_u |u⟩`, with ciphertexts under `x ∥ C̃`.

use std::sync::Arc;

use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pkecrskl::{self, ABE_SK};
use crate::policy;
use crate::prims::abe::{self, AbeCiphertext, AbeMsk, AbeParams, AbePk};
use crate::prims::skfe::{self, Functionality, SkfeCiphertext, SkfeMsk, SkfeParams};
use crate::prims::{CcHandle, CcParams, CcRegistry, Owf};
use crate::qreg::{SimConfig, SparseState};
use crate::signed::{self, SignedKey, SignedTk, SignedVk};
use crate::skecd::{self, SkecdParams, SkecdSecretKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkfeSklParams {
    pub lambda: usize,
    pub n: usize,
    pub h: usize,
    /// Width of SKFE key attributes `y`.
    pub attr_bits: usize,
    /// Width of `F`'s output.
    pub out_bits: usize,
    pub sig_bits: usize,
    pub owf_bits: usize,
}

impl SkfeSklParams {
    pub fn new(lambda: usize, n: usize, h: usize, attr_bits: usize, out_bits: usize) -> Self {
        Self {
            lambda,
            n,
            h,
            attr_bits,
            out_bits,
            sig_bits: lambda,
            owf_bits: lambda,
        }
    }

    pub fn skfe(&self) -> SkfeParams {
        SkfeParams {
            lambda: self.lambda,
            attr_bits: self.attr_bits,
            out_bits: self.out_bits,
        }
    }

    /// The inner SKE-CD encrypts an SKFE token, so its message width is the
    /// token width.
    pub fn skecd(&self) -> SkecdParams {
        SkecdParams {
            lambda: self.lambda,
            n: self.n,
            h: self.h,
            msg_bits: self.skfe().token_bits(),
        }
    }

    pub fn ell(&self) -> usize {
        self.skecd().ct_bits()
    }

    /// Width of a full key string `u`.
    pub fn key_bits(&self) -> usize {
        self.ell() * (1 + self.sig_bits)
    }

    pub fn owf(&self) -> Owf {
        Owf::new(self.sig_bits, self.owf_bits)
    }
}

pub struct SkfeSklMsk<X> {
    skecd: SkecdSecretKey,
    skfe: SkfeMsk<X>,
    params: SkfeSklParams,
    config: SimConfig,
}

impl<X> Clone for SkfeSklMsk<X> {
    fn clone(&self) -> Self {
        Self {
            skecd: self.skecd.clone(),
            skfe: self.skfe.clone(),
            params: self.params,
            config: self.config,
        }
    }
}

impl<X> std::fmt::Debug for SkfeSklMsk<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkfeSklMsk").field("params", &self.params).finish_non_exhaustive()
    }
}

pub type SkfeSklKey = SignedKey;
pub type SkfeSklVk = SignedVk;
pub type SkfeSklTk = SignedTk;

pub struct SkfeSklCt<X> {
    pub skecd: SkecdSecretKey,
    pub skfe: SkfeCiphertext<X>,
}

impl<X: Clone> Clone for SkfeSklCt<X> {
    fn clone(&self) -> Self {
        Self {
            skecd: self.skecd.clone(),
            skfe: self.skfe.clone(),
        }
    }
}

pub fn skfe_skl_setup<X, R: Rng + ?Sized>(
    params: SkfeSklParams,
    func: Functionality<X>,
    rng: &mut R,
) -> Result<SkfeSklMsk<X>> {
    if params.sig_bits == 0 || params.owf_bits == 0 {
        return Err(Error::InvalidParams("signature widths must be positive".into()));
    }
    Ok(SkfeSklMsk {
        skecd: skecd::kg(params.skecd(), rng)?,
        skfe: skfe::setup(params.skfe(), func, rng),
        params,
        config: SimConfig::default(),
    })
}

impl<X> SkfeSklMsk<X> {
    pub fn params(&self) -> SkfeSklParams {
        self.params
    }

    pub fn kg<R: Rng + ?Sized>(&self, y: &Bits, rng: &mut R) -> Result<(SkfeSklKey, SkfeSklVk, SkfeSklTk)> {
        let token = self.skfe.kg(y)?;
        signed::issue(&self.skecd, &token, self.params.owf(), self.config, rng)
    }

    pub fn enc(&self, x: X) -> SkfeSklCt<X> {
        SkfeSklCt {
            skecd: self.skecd.clone(),
            skfe: self.skfe.enc(x),
        }
    }
}

impl<X> SkfeSklCt<X> {
    /// `SKFE.Dec(SKECD.CDec(skecd.sk, ũ), skfe.ct)`.
    pub fn cdec(&self, key_bits: &Bits) -> Option<Bits> {
        let ell = self.skecd.params().ct_bits();
        if key_bits.len() < ell {
            return None;
        }
        let token = self.skecd.cdec(&key_bits.slice(0, ell)).ok()?;
        self.skfe.dec(&token)
    }

    pub fn dec<R: Rng + ?Sized>(&self, key: SkfeSklKey, out_bits: usize, rng: &mut R) -> Result<(Option<Bits>, SkfeSklKey)> {
        let ell = key.ell;
        let ct_idx = signed::ct_indices(&key.state, ell)?;
        let (z, state) = signed::decrypt_coherent(key.state, out_bits, |view| {
            let token = self.skecd.cdec(&signed::ct_bits(view, &ct_idx)).ok()?;
            self.skfe.dec(&token)
        }, rng)?;
        Ok((z, SignedKey { state, ell }))
    }
}

/// SKFE plaintext for ABE-CR-SKL: a policy table and a payload `z`.
pub type PolicyPayload = (Bits, Bits);

/// `F(x ∥ z, y) = z` if `R(x, y) = 0`, else ⊥.
pub fn policy_functionality() -> Functionality<PolicyPayload> {
    Arc::new(|x: &PolicyPayload, y: &Bits| policy::allows(&x.0, y).then(|| x.1.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbeSklParams {
    pub skfe: SkfeSklParams,
    pub msg_bits: usize,
}

impl AbeSklParams {
    /// `|y| = attr_bits`; SKFE payloads and messages are `λ` bits.
    pub fn new(lambda: usize, n: usize, h: usize, attr_bits: usize) -> Self {
        Self {
            skfe: SkfeSklParams::new(lambda, n, h, attr_bits, lambda),
            msg_bits: lambda,
        }
    }

    pub fn attr_bits(&self) -> usize {
        self.skfe.attr_bits
    }

    pub fn pp_d(&self) -> CcParams {
        CcParams {
            input_bits: self.skfe.key_bits(),
            output_bits: self.skfe.lambda,
            size: 0,
        }
    }

    fn abe_params(&self) -> AbeParams {
        AbeParams {
            lambda: self.skfe.lambda,
            attr_bits: self.skfe.attr_bits + self.skfe.key_bits(),
            rand_bits: self.skfe.lambda,
            msg_bits: self.msg_bits,
        }
    }
}

/// ABE ciphertext attribute `x ∥ C̃`.
pub type PolicyAttr = (Bits, CcHandle);

#[derive(Clone, Debug)]
pub struct AbeSklPk {
    abe: AbePk<PolicyAttr>,
    registry: Arc<CcRegistry>,
    params: AbeSklParams,
}

#[derive(Clone, Debug)]
pub struct AbeSklMsk {
    abe: AbeMsk<PolicyAttr>,
    skfe: SkfeSklMsk<PolicyPayload>,
    params: AbeSklParams,
}

#[derive(Clone, Debug)]
pub struct AbeSklKey {
    pub state: SparseState,
    pub ell: usize,
}

#[derive(Clone, Debug)]
pub struct AbeSklVk {
    pub y: Bits,
    abe_msk: AbeMsk<PolicyAttr>,
    pub skfe_vk: SkfeSklVk,
    pub skfe_tk: SkfeSklTk,
    pub k: Bits,
}

#[derive(Clone, Debug)]
pub struct AbeSklCt {
    pub abe: AbeCiphertext<PolicyAttr>,
}

pub fn abe_skl_setup<R: Rng + ?Sized>(params: AbeSklParams, rng: &mut R) -> Result<(AbeSklPk, AbeSklMsk)> {
    policy::check_attr_bits(params.attr_bits())?;
    let registry = Arc::new(CcRegistry::new());
    let reg = Arc::clone(&registry);
    let attr_bits = params.attr_bits();
    // R′(x ∥ C, y ∥ u) = 0 iff R(x, y) = 0 and C(u) = ⊥
    let relation: abe::Relation<PolicyAttr> = Arc::new(move |x: &PolicyAttr, yu: &Bits| {
        let y = yu.slice(0, attr_bits);
        let u = yu.slice(attr_bits, yu.len() - attr_bits);
        policy::allows(&x.0, &y) && matches!(reg.eval(x.1, &u), Ok(None))
    });
    let (pk, abe_msk) = abe::setup(params.abe_params(), relation, rng);
    let skfe = skfe_skl_setup(params.skfe, policy_functionality(), rng)?;
    Ok((
        AbeSklPk {
            abe: pk,
            registry,
            params,
        },
        AbeSklMsk {
            abe: abe_msk,
            skfe,
            params,
        },
    ))
}

impl AbeSklPk {
    pub fn params(&self) -> AbeSklParams {
        self.params
    }

    pub fn registry(&self) -> &Arc<CcRegistry> {
        &self.registry
    }

    /// Encrypts under the policy table `x`.
    pub fn enc(&self, x: &Bits, m: &Bits) -> Result<AbeSklCt> {
        if x.len() != policy::table_bits(self.params.attr_bits()) {
            return Err(Error::LengthMismatch {
                expected: policy::table_bits(self.params.attr_bits()),
                actual: x.len(),
            });
        }
        let c = self.registry.simulate(self.params.pp_d());
        Ok(AbeSklCt {
            abe: self.abe.enc((x.clone(), c), m)?,
        })
    }
}

impl AbeSklMsk {
    pub fn params(&self) -> AbeSklParams {
        self.params
    }

    pub fn kg<R: Rng + ?Sized>(&self, y: &Bits, rng: &mut R) -> Result<(AbeSklKey, AbeSklVk)> {
        let (inner, skfe_vk, skfe_tk) = self.skfe.kg(y, rng)?;
        let k = Bits::random(self.params.skfe.lambda, rng);
        let ell = inner.ell;
        let mut state = inner.state;
        state.append_segment(ABE_SK, self.abe.params().token_bits())?;
        let idx = pkecrskl::inner_indices(&state, ell)?;
        pkecrskl::xor_abe_key(&mut state, &idx, &self.abe, y, &k)?;
        Ok((
            AbeSklKey { state, ell },
            AbeSklVk {
                y: y.clone(),
                abe_msk: self.abe.clone(),
                skfe_vk,
                skfe_tk,
                k,
            },
        ))
    }
}

impl AbeSklKey {
    pub fn dec<R: Rng + ?Sized>(self, ct: &AbeSklCt, rng: &mut R) -> Result<(Option<Bits>, AbeSklKey)> {
        let ell = self.ell;
        let (m, state) = pkecrskl::abe_decrypt_coherent(self.state, &ct.abe, rng)?;
        Ok((m, AbeSklKey { state, ell }))
    }

    pub fn vrfy<R: Rng + ?Sized>(self, vk: &AbeSklVk, rng: &mut R) -> Result<bool> {
        pkecrskl::layered_verify(
            self.state,
            self.ell,
            &vk.abe_msk,
            &vk.y,
            &vk.k,
            &vk.skfe_vk,
            &vk.skfe_tk,
            rng,
        )
    }

    /// State after the verification uncompute of ABE.SK.
    pub fn uncompute(&self, vk: &AbeSklVk) -> Result<SparseState> {
        let mut state = self.state.clone();
        let idx = pkecrskl::inner_indices(&state, self.ell)?;
        pkecrskl::xor_abe_key(&mut state, &idx, &vk.abe_msk, &vk.y, &vk.k)?;
        Ok(state)
    }
}
