//! Leasing schemes seen through the interface the games need.

use std::collections::BTreeMap;

use crate::bits::Bits;
use crate::cr2::{self, Cr2Cert, Cr2Ct, Cr2Ek, Cr2Key, Cr2Msk, Cr2Params, Cr2Vk};
use crate::error::{Error, Result};
use crate::feskl::{self, AbeSklCt, AbeSklKey, AbeSklMsk, AbeSklParams, AbeSklPk, AbeSklVk};
use crate::feskl::{PolicyPayload, SkfeSklCt, SkfeSklMsk, SkfeSklParams};
use crate::pkecrskl::{self, PkeCt, PkeDk, PkeEk, PkeMsk, PkeParams, PkeVk};
use crate::policy;
use crate::qreg::SparseState;
use crate::signed::{SignedKey, SignedTk, SignedVk};
use crate::skecrskl::{self, CrSklCt, CrSklMsk, SkeCrSklParams};

use super::TrialRng;

/// A leased key as the adversary holds it.
#[derive(Clone, Debug)]
pub struct LeasedKey {
    pub state: SparseState,
    /// Number of signed positions (slots for the certificate scheme).
    pub ell: usize,
}

/// What an adversary hands back to the verification oracle.
#[derive(Clone, Debug)]
pub enum Returned {
    State(SparseState),
    Cert(Cr2Cert),
}

/// Factory for per-trial instances.
pub trait KlaScheme: Sync {
    type Instance: KlaInstance;

    fn name(&self) -> &'static str;
    fn params(&self) -> BTreeMap<String, u64>;
    fn instantiate(&self, rng: &mut TrialRng) -> Result<Self::Instance>;
}

/// One setup of a leasing scheme. Keys are indexed by issue order.
pub trait KlaInstance {
    type Ct;

    fn msg_bits(&self) -> usize;

    /// Width of key attributes; 0 for schemes without attributes.
    fn attr_bits(&self) -> usize {
        0
    }

    /// Width of ciphertext policies; 0 for schemes without attributes.
    fn policy_bits(&self) -> usize {
        match self.attr_bits() {
            0 => 0,
            w => policy::table_bits(w),
        }
    }

    /// Whether a key for `y` decrypts ciphertexts under `policy`.
    fn decryptable(&self, policy: &Bits, y: &Bits) -> bool {
        self.attr_bits() == 0 || policy::allows(policy, y)
    }

    /// Whether anyone can encrypt.
    fn public_encryption(&self) -> bool {
        false
    }

    fn kg(&mut self, y: &Bits, rng: &mut TrialRng) -> Result<LeasedKey>;
    fn vrfy(&self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool>;
    /// The honest return procedure applied to a key.
    fn surrender(&self, key: LeasedKey, rng: &mut TrialRng) -> Result<Returned>;
    fn enc(&self, policy: &Bits, m: &Bits, rng: &mut TrialRng) -> Result<Self::Ct>;
    fn dec(&self, key: LeasedKey, ct: &Self::Ct, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)>;

    /// Coherent KeyTest of key `i`, for schemes that have testing keys.
    fn keytest(&self, _i: usize, _key: LeasedKey, _rng: &mut TrialRng) -> Result<Option<(bool, LeasedKey)>> {
        Ok(None)
    }
}

/// Malformed returns are rejected rather than treated as failures of the
/// experiment.
pub(crate) fn reject_malformed(r: Result<bool>) -> Result<bool> {
    match r {
        Err(Error::LayoutMismatch)
        | Err(Error::UnknownSegment(_))
        | Err(Error::LengthMismatch { .. })
        | Err(Error::InvalidLayout(_)) => Ok(false),
        other => other,
    }
}

fn state_of(returned: Returned) -> Option<SparseState> {
    match returned {
        Returned::State(s) => Some(s),
        Returned::Cert(_) => None,
    }
}

fn vk_at<T>(vks: &[T], i: usize) -> Result<&T> {
    vks.get(i).ok_or(Error::SlotOutOfRange {
        index: i,
        slots: vks.len(),
    })
}

fn base_params(lambda: usize, n: usize, h: usize) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("lambda".to_string(), lambda as u64),
        ("n".to_string(), n as u64),
        ("h".to_string(), h as u64),
    ])
}

#[derive(Clone, Copy, Debug)]
pub struct SkeCrSklScheme(pub SkeCrSklParams);

pub struct SkeCrSklInstance {
    msk: CrSklMsk,
    keys: Vec<(SignedVk, SignedTk)>,
}

impl KlaScheme for SkeCrSklScheme {
    type Instance = SkeCrSklInstance;

    fn name(&self) -> &'static str {
        "skecrskl"
    }

    fn params(&self) -> BTreeMap<String, u64> {
        let p = self.0.skecd;
        base_params(p.lambda, p.n, p.h)
    }

    fn instantiate(&self, rng: &mut TrialRng) -> Result<SkeCrSklInstance> {
        Ok(SkeCrSklInstance {
            msk: skecrskl::setup(self.0, rng)?,
            keys: Vec::new(),
        })
    }
}

impl SkeCrSklInstance {
    pub fn msk(&self) -> &CrSklMsk {
        &self.msk
    }

    pub fn testing_key(&self, i: usize) -> Result<&SignedTk> {
        Ok(&vk_at(&self.keys, i)?.1)
    }
}

impl KlaInstance for SkeCrSklInstance {
    type Ct = CrSklCt;

    fn msg_bits(&self) -> usize {
        self.msk.params().msg_bits()
    }

    fn kg(&mut self, _y: &Bits, rng: &mut TrialRng) -> Result<LeasedKey> {
        let (dk, vk, tk) = skecrskl::kg(&self.msk, rng)?;
        self.keys.push((vk, tk));
        Ok(LeasedKey {
            state: dk.state,
            ell: dk.ell,
        })
    }

    fn vrfy(&self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool> {
        let vk = &vk_at(&self.keys, i)?.0;
        let Some(state) = state_of(returned) else {
            return Ok(false);
        };
        let dk = skecrskl::dk_from_state(state, vk.x.len());
        reject_malformed(skecrskl::vrfy(vk, dk, rng))
    }

    fn surrender(&self, key: LeasedKey, _rng: &mut TrialRng) -> Result<Returned> {
        Ok(Returned::State(key.state))
    }

    fn enc(&self, _policy: &Bits, m: &Bits, _rng: &mut TrialRng) -> Result<CrSklCt> {
        skecrskl::enc(&self.msk, m)
    }

    fn dec(&self, key: LeasedKey, ct: &CrSklCt, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)> {
        let (m, dk) = skecrskl::dec(skecrskl::dk_from_state(key.state, key.ell), ct, rng)?;
        Ok((m, LeasedKey { state: dk.state, ell: dk.ell }))
    }

    fn keytest(&self, i: usize, key: LeasedKey, rng: &mut TrialRng) -> Result<Option<(bool, LeasedKey)>> {
        let tk = self.testing_key(i)?;
        let (ok, dk) = skecrskl::keytest_coherent(tk, SignedKey { state: key.state, ell: key.ell }, rng)?;
        Ok(Some((ok, LeasedKey { state: dk.state, ell: dk.ell })))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PkeCrSklScheme(pub PkeParams);

pub struct PkeCrSklInstance {
    ek: PkeEk,
    msk: PkeMsk,
    vks: Vec<PkeVk>,
}

impl KlaScheme for PkeCrSklScheme {
    type Instance = PkeCrSklInstance;

    fn name(&self) -> &'static str {
        "pkecrskl"
    }

    fn params(&self) -> BTreeMap<String, u64> {
        let p = self.0.ske.skecd;
        base_params(p.lambda, p.n, p.h)
    }

    fn instantiate(&self, rng: &mut TrialRng) -> Result<PkeCrSklInstance> {
        let (ek, msk) = pkecrskl::setup(self.0, rng)?;
        Ok(PkeCrSklInstance {
            ek,
            msk,
            vks: Vec::new(),
        })
    }
}

impl PkeCrSklInstance {
    pub fn vk(&self, i: usize) -> Result<&PkeVk> {
        vk_at(&self.vks, i)
    }
}

impl KlaInstance for PkeCrSklInstance {
    type Ct = PkeCt;

    fn msg_bits(&self) -> usize {
        self.ek.msg_bits()
    }

    fn public_encryption(&self) -> bool {
        true
    }

    fn kg(&mut self, _y: &Bits, rng: &mut TrialRng) -> Result<LeasedKey> {
        let (dk, vk) = pkecrskl::kg(&self.msk, rng)?;
        self.vks.push(vk);
        Ok(LeasedKey {
            state: dk.state,
            ell: dk.ell,
        })
    }

    fn vrfy(&self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool> {
        let vk = self.vk(i)?;
        let Some(state) = state_of(returned) else {
            return Ok(false);
        };
        let dk = PkeDk {
            state,
            ell: vk.ske_vk.x.len(),
        };
        reject_malformed(pkecrskl::vrfy(vk, dk, rng))
    }

    fn surrender(&self, key: LeasedKey, _rng: &mut TrialRng) -> Result<Returned> {
        Ok(Returned::State(key.state))
    }

    fn enc(&self, _policy: &Bits, m: &Bits, _rng: &mut TrialRng) -> Result<PkeCt> {
        pkecrskl::enc(&self.ek, m)
    }

    fn dec(&self, key: LeasedKey, ct: &PkeCt, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)> {
        let (m, dk) = pkecrskl::dec(PkeDk { state: key.state, ell: key.ell }, ct, rng)?;
        Ok((m, LeasedKey { state: dk.state, ell: dk.ell }))
    }

    fn keytest(&self, i: usize, key: LeasedKey, rng: &mut TrialRng) -> Result<Option<(bool, LeasedKey)>> {
        let tk = &self.vk(i)?.ske_tk;
        let (ok, state) = crate::signed::keytest_state(key.state, tk, key.ell, pkecrskl::SKE_KT, rng)?;
        Ok(Some((ok, LeasedKey { state, ell: key.ell })))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SkfeCrSklScheme(pub SkfeSklParams);

pub struct SkfeCrSklInstance {
    msk: SkfeSklMsk<PolicyPayload>,
    keys: Vec<(SignedVk, SignedTk)>,
}

impl KlaScheme for SkfeCrSklScheme {
    type Instance = SkfeCrSklInstance;

    fn name(&self) -> &'static str {
        "skfecrskl"
    }

    fn params(&self) -> BTreeMap<String, u64> {
        let p = self.0;
        let mut m = base_params(p.lambda, p.n, p.h);
        m.insert("attr_bits".to_string(), p.attr_bits as u64);
        m
    }

    fn instantiate(&self, rng: &mut TrialRng) -> Result<SkfeCrSklInstance> {
        policy::check_attr_bits(self.0.attr_bits)?;
        Ok(SkfeCrSklInstance {
            msk: feskl::skfe_skl_setup(self.0, feskl::policy_functionality(), rng)?,
            keys: Vec::new(),
        })
    }
}

impl KlaInstance for SkfeCrSklInstance {
    type Ct = SkfeSklCt<PolicyPayload>;

    fn msg_bits(&self) -> usize {
        self.msk.params().out_bits
    }

    fn attr_bits(&self) -> usize {
        self.msk.params().attr_bits
    }

    fn kg(&mut self, y: &Bits, rng: &mut TrialRng) -> Result<LeasedKey> {
        let (key, vk, tk) = self.msk.kg(y, rng)?;
        self.keys.push((vk, tk));
        Ok(LeasedKey {
            state: key.state,
            ell: key.ell,
        })
    }

    fn vrfy(&self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool> {
        let vk = &vk_at(&self.keys, i)?.0;
        let Some(state) = state_of(returned) else {
            return Ok(false);
        };
        reject_malformed(SignedKey { state, ell: vk.x.len() }.verify(vk, rng))
    }

    fn surrender(&self, key: LeasedKey, _rng: &mut TrialRng) -> Result<Returned> {
        Ok(Returned::State(key.state))
    }

    fn enc(&self, policy: &Bits, m: &Bits, _rng: &mut TrialRng) -> Result<Self::Ct> {
        for (expected, actual) in [(self.policy_bits(), policy.len()), (self.msg_bits(), m.len())] {
            if expected != actual {
                return Err(Error::LengthMismatch { expected, actual });
            }
        }
        Ok(self.msk.enc((policy.clone(), m.clone())))
    }

    fn dec(&self, key: LeasedKey, ct: &Self::Ct, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)> {
        let out_bits = self.msg_bits();
        let (m, k) = ct.dec(SignedKey { state: key.state, ell: key.ell }, out_bits, rng)?;
        Ok((m, LeasedKey { state: k.state, ell: k.ell }))
    }

    fn keytest(&self, i: usize, key: LeasedKey, rng: &mut TrialRng) -> Result<Option<(bool, LeasedKey)>> {
        let tk = &vk_at(&self.keys, i)?.1;
        let (ok, k) = SignedKey { state: key.state, ell: key.ell }.keytest_coherent(tk, rng)?;
        Ok(Some((ok, LeasedKey { state: k.state, ell: k.ell })))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AbeCrSklScheme(pub AbeSklParams);

pub struct AbeCrSklInstance {
    pk: AbeSklPk,
    msk: AbeSklMsk,
    vks: Vec<AbeSklVk>,
}

impl KlaScheme for AbeCrSklScheme {
    type Instance = AbeCrSklInstance;

    fn name(&self) -> &'static str {
        "abecrskl"
    }

    fn params(&self) -> BTreeMap<String, u64> {
        let p = self.0.skfe;
        let mut m = base_params(p.lambda, p.n, p.h);
        m.insert("attr_bits".to_string(), p.attr_bits as u64);
        m
    }

    fn instantiate(&self, rng: &mut TrialRng) -> Result<AbeCrSklInstance> {
        let (pk, msk) = feskl::abe_skl_setup(self.0, rng)?;
        Ok(AbeCrSklInstance {
            pk,
            msk,
            vks: Vec::new(),
        })
    }
}

impl AbeCrSklInstance {
    pub fn vk(&self, i: usize) -> Result<&AbeSklVk> {
        vk_at(&self.vks, i)
    }
}

impl KlaInstance for AbeCrSklInstance {
    type Ct = AbeSklCt;

    fn msg_bits(&self) -> usize {
        self.pk.params().msg_bits
    }

    fn attr_bits(&self) -> usize {
        self.pk.params().attr_bits()
    }

    fn public_encryption(&self) -> bool {
        true
    }

    fn kg(&mut self, y: &Bits, rng: &mut TrialRng) -> Result<LeasedKey> {
        let (key, vk) = self.msk.kg(y, rng)?;
        self.vks.push(vk);
        Ok(LeasedKey {
            state: key.state,
            ell: key.ell,
        })
    }

    fn vrfy(&self, i: usize, returned: Returned, rng: &mut TrialRng) -> Result<bool> {
        let vk = self.vk(i)?;
        let Some(state) = state_of(returned) else {
            return Ok(false);
        };
        let key = AbeSklKey {
            state,
            ell: vk.skfe_vk.x.len(),
        };
        reject_malformed(key.vrfy(vk, rng))
    }

    fn surrender(&self, key: LeasedKey, _rng: &mut TrialRng) -> Result<Returned> {
        Ok(Returned::State(key.state))
    }

    fn enc(&self, policy: &Bits, m: &Bits, _rng: &mut TrialRng) -> Result<AbeSklCt> {
        self.pk.enc(policy, m)
    }

    fn dec(&self, key: LeasedKey, ct: &AbeSklCt, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)> {
        let (m, k) = AbeSklKey { state: key.state, ell: key.ell }.dec(ct, rng)?;
        Ok((m, LeasedKey { state: k.state, ell: k.ell }))
    }

    fn keytest(&self, i: usize, key: LeasedKey, rng: &mut TrialRng) -> Result<Option<(bool, LeasedKey)>> {
        let tk = &self.vk(i)?.skfe_tk;
        let (ok, state) = crate::signed::keytest_state(key.state, tk, key.ell, pkecrskl::SKE_KT, rng)?;
        Ok(Some((ok, LeasedKey { state, ell: key.ell })))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AbeCr2SklScheme(pub Cr2Params);

pub struct AbeCr2SklInstance {
    ek: Cr2Ek,
    msk: Cr2Msk,
    vks: Vec<Cr2Vk>,
}

impl KlaScheme for AbeCr2SklScheme {
    type Instance = AbeCr2SklInstance;

    fn name(&self) -> &'static str {
        "abecr2skl"
    }

    fn params(&self) -> BTreeMap<String, u64> {
        let p = self.0;
        let mut m = base_params(p.lambda, p.n, p.h);
        m.insert("attr_bits".to_string(), p.attr_bits as u64);
        m.insert("k".to_string(), p.slots() as u64);
        m
    }

    fn instantiate(&self, rng: &mut TrialRng) -> Result<AbeCr2SklInstance> {
        let (ek, msk) = cr2::setup(self.0, rng)?;
        Ok(AbeCr2SklInstance {
            ek,
            msk,
            vks: Vec::new(),
        })
    }
}

impl AbeCr2SklInstance {
    pub fn vk(&self, i: usize) -> Result<&Cr2Vk> {
        vk_at(&self.vks, i)
    }
}

impl KlaInstance for AbeCr2SklInstance {
    type Ct = Cr2Ct;

    fn msg_bits(&self) -> usize {
        self.ek.params().msg_bits
    }

    fn attr_bits(&self) -> usize {
        self.ek.params().attr_bits
    }

    fn public_encryption(&self) -> bool {
        true
    }

    fn kg(&mut self, y: &Bits, rng: &mut TrialRng) -> Result<LeasedKey> {
        let (key, vk) = self.msk.kg(y, rng)?;
        self.vks.push(vk);
        Ok(LeasedKey {
            state: key.state,
            ell: key.slots,
        })
    }

    fn vrfy(&self, i: usize, returned: Returned, _rng: &mut TrialRng) -> Result<bool> {
        let vk = self.vk(i)?;
        Ok(match returned {
            Returned::Cert(cert) => cr2::vrfy(vk, &cert),
            Returned::State(_) => false,
        })
    }

    /// Honest deletion: Hadamard-measure every block.
    fn surrender(&self, key: LeasedKey, rng: &mut TrialRng) -> Result<Returned> {
        let key = Cr2Key {
            state: key.state,
            slots: key.ell,
        };
        Ok(Returned::Cert(key.del(rng)?))
    }

    fn enc(&self, policy: &Bits, m: &Bits, _rng: &mut TrialRng) -> Result<Cr2Ct> {
        self.ek.enc(policy, m)
    }

    fn dec(&self, key: LeasedKey, ct: &Cr2Ct, rng: &mut TrialRng) -> Result<(Option<Bits>, LeasedKey)> {
        let (m, k) = Cr2Key {
            state: key.state,
            slots: key.ell,
        }
        .dec(ct, rng)?;
        Ok((m, LeasedKey { state: k.state, ell: k.slots }))
    }
}
