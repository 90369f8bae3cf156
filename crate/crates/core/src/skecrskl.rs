//! Secret-key encryption with collusion-resistant secure key leasing.
//!
//! Every key is an SKE-CD ciphertext of the same random `r`, with each
//! position signed by OWF preimages. A message is encrypted as
//! `(skecd.sk, r ⊕ m)`.

use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prims::Owf;
use crate::qreg::{SimConfig, SparseState};
use crate::signed::{self, SignedKey, SignedTk, SignedVk};
use crate::skecd::{self, SkecdParams, SkecdSecretKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkeCrSklParams {
    pub skecd: SkecdParams,
    /// Width of the OWF preimages in the `S_i` registers.
    pub sig_bits: usize,
    /// `p(λ)`.
    pub owf_bits: usize,
}

impl SkeCrSklParams {
    /// `ℓ_msg = λ`, preimages and images of `λ` bits.
    pub fn new(lambda: usize, n: usize, h: usize) -> Self {
        Self {
            skecd: SkecdParams {
                lambda,
                n,
                h,
                msg_bits: lambda,
            },
            sig_bits: lambda,
            owf_bits: lambda,
        }
    }

    pub fn msg_bits(&self) -> usize {
        self.skecd.msg_bits
    }

    /// `ℓ_ct`, the number of signed positions.
    pub fn ell(&self) -> usize {
        self.skecd.ct_bits()
    }

    pub fn owf(&self) -> Owf {
        Owf::new(self.sig_bits, self.owf_bits)
    }

    pub fn validate(&self) -> Result<()> {
        self.skecd.validate()?;
        if self.sig_bits == 0 || self.owf_bits == 0 {
            return Err(Error::InvalidParams("signature widths must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrSklMsk {
    skecd: SkecdSecretKey,
    r: Bits,
    params: SkeCrSklParams,
    config: SimConfig,
}

pub type CrSklDk = SignedKey;
pub type CrSklVk = SignedVk;
pub type CrSklTk = SignedTk;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrSklCt {
    pub skecd: SkecdSecretKey,
    pub z: Bits,
}

pub fn setup<R: Rng + ?Sized>(params: SkeCrSklParams, rng: &mut R) -> Result<CrSklMsk> {
    setup_with(params, SimConfig::default(), rng)
}

pub fn setup_with<R: Rng + ?Sized>(params: SkeCrSklParams, config: SimConfig, rng: &mut R) -> Result<CrSklMsk> {
    params.validate()?;
    Ok(CrSklMsk {
        skecd: skecd::kg(params.skecd, rng)?,
        r: Bits::random(params.msg_bits(), rng),
        params,
        config,
    })
}

impl CrSklMsk {
    pub fn params(&self) -> SkeCrSklParams {
        self.params
    }

    pub fn r(&self) -> &Bits {
        &self.r
    }

    pub fn skecd(&self) -> &SkecdSecretKey {
        &self.skecd
    }

    pub fn config(&self) -> SimConfig {
        self.config
    }
}

pub fn kg<R: Rng + ?Sized>(msk: &CrSklMsk, rng: &mut R) -> Result<(CrSklDk, CrSklVk, CrSklTk)> {
    signed::issue(&msk.skecd, &msk.r, msk.params.owf(), msk.config, rng)
}

pub fn enc(msk: &CrSklMsk, m: &Bits) -> Result<CrSklCt> {
    if m.len() != msk.params.msg_bits() {
        return Err(Error::LengthMismatch {
            expected: msk.params.msg_bits(),
            actual: m.len(),
        });
    }
    Ok(CrSklCt {
        skecd: msk.skecd.clone(),
        z: msk.r.xor(m),
    })
}

/// `z ⊕ SKECD.CDec(skecd.sk, ũ)` where `ũ` is the `SKECD.CT` substring
/// (the first `ℓ_ct` bits) of the key string.
pub fn cdec(dk_bits: &Bits, ct: &CrSklCt) -> Result<Bits> {
    let ell = ct.skecd.params().ct_bits();
    if dk_bits.len() < ell {
        return Err(Error::LengthMismatch {
            expected: ell,
            actual: dk_bits.len(),
        });
    }
    Ok(ct.z.xor(&ct.skecd.cdec(&dk_bits.slice(0, ell))?))
}

/// Coherent decryption; the returned key equals the input key for honest keys.
pub fn dec<R: Rng + ?Sized>(dk: CrSklDk, ct: &CrSklCt, rng: &mut R) -> Result<(Option<Bits>, CrSklDk)> {
    let ell = dk.ell;
    let ct_idx = signed::ct_indices(&dk.state, ell)?;
    let (m, state) = signed::decrypt_coherent(dk.state, ct.z.len(), |view| {
        let u = signed::ct_bits(view, &ct_idx);
        ct.skecd.cdec(&u).ok().map(|v| v.xor(&ct.z))
    }, rng)?;
    Ok((m, SignedKey { state, ell }))
}

pub fn vrfy<R: Rng + ?Sized>(vk: &CrSklVk, dk: CrSklDk, rng: &mut R) -> Result<bool> {
    dk.verify(vk, rng)
}

pub fn keytest(tk: &CrSklTk, dk_bits: &Bits) -> bool {
    tk.test_bits(dk_bits)
}

pub fn keytest_coherent<R: Rng + ?Sized>(tk: &CrSklTk, dk: CrSklDk, rng: &mut R) -> Result<(bool, CrSklDk)> {
    dk.keytest_coherent(tk, rng)
}

/// Wraps a state returned by an adversary as a key of `ell` positions.
pub fn dk_from_state(state: SparseState, ell: usize) -> CrSklDk {
    SignedKey { state, ell }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qreg::states_equal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params(h: usize) -> SkeCrSklParams {
        SkeCrSklParams::new(16, 6, h)
    }

    #[test]
    fn setup_shapes() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = setup(params(2), &mut rng).unwrap();
        let b = setup(params(2), &mut rng).unwrap();
        assert_eq!(a.r().len(), 16);
        assert_ne!(a.r(), b.r());
        assert_eq!(a.skecd().params(), params(2).skecd);
    }

    #[test]
    fn enc_masks_with_r() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let msk = setup(params(2), &mut rng).unwrap();
        assert_eq!(&enc(&msk, &Bits::zeros(16)).unwrap().z, msk.r());
        let m = Bits::random(16, &mut rng);
        assert_eq!(enc(&msk, &m).unwrap().z, msk.r().xor(&m));
        assert!(enc(&msk, &Bits::zeros(3)).is_err());
    }

    #[test]
    fn hadamard_block_shape() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let msk = setup(params(1), &mut rng).unwrap();
        let (dk, vk, _) = kg(&msk, &mut rng).unwrap();
        assert_eq!(dk.state.term_count(), 2);
        let i = (0..dk.ell).find(|&i| vk.theta.get(i)).unwrap();
        let s_vals = dk.state.segment_values(&format!("S_{}", i + 1)).unwrap();
        assert_eq!(s_vals.len(), 2);
        let v: Vec<_> = s_vals.into_iter().collect();
        assert_eq!(&v[0].xor(&v[1]), vk.xors[i].as_ref().unwrap());
        // the sign of the |1⟩ branch is (−1)^{x[i]}
        let terms: Vec<_> = dk.state.terms().collect();
        let one_branch = terms.iter().find(|(b, _)| b.get(i)).unwrap().1;
        let zero_branch = terms.iter().find(|(b, _)| !b.get(i)).unwrap().1;
        let same_sign = (one_branch.re > 0.0) == (zero_branch.re > 0.0);
        assert_eq!(same_sign, !vk.x.get(i));
    }

    #[test]
    fn keys_share_r_but_not_material() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let msk = setup(params(2), &mut rng).unwrap();
        let (d1, v1, t1) = kg(&msk, &mut rng).unwrap();
        let (d2, v2, t2) = kg(&msk, &mut rng).unwrap();
        assert_ne!(v1.x, v2.x);
        assert_ne!(t1, t2);
        let ct = enc(&msk, &Bits::ones(16)).unwrap();
        for d in [d1, d2] {
            let (bits, _) = d.state.terms().next().unwrap();
            assert_eq!(cdec(&bits, &ct).unwrap(), Bits::ones(16));
        }
    }

    #[test]
    fn dec_is_correct_and_gentle() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let msk = setup(params(3), &mut rng).unwrap();
        let (dk, vk, _) = kg(&msk, &mut rng).unwrap();
        let m = Bits::random(16, &mut rng);
        let ct = enc(&msk, &m).unwrap();
        let before = dk.state.clone();
        let (out, dk) = dec(dk, &ct, &mut rng).unwrap();
        assert_eq!(out, Some(m.clone()));
        assert!(states_equal(&before, &dk.state, 1e-9).unwrap());
        let (again, dk) = dec(dk, &ct, &mut rng).unwrap();
        assert_eq!(again, Some(m));
        assert!(vrfy(&vk, dk, &mut rng).unwrap());
    }

    #[test]
    fn keytest_rejects_random_preimage() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let msk = setup(params(2), &mut rng).unwrap();
        let (dk, _, tk) = kg(&msk, &mut rng).unwrap();
        let (bits, _) = dk.state.terms().next().unwrap();
        assert!(keytest(&tk, &bits));
        let ell = dk.ell;
        for i in 0..ell {
            let mut forged = bits.clone();
            let start = ell + i * 16;
            let junk = Bits::random(16, &mut rng);
            for j in 0..16 {
                forged.set(start + j, junk.get(j));
            }
            assert!(!keytest(&tk, &forged));
        }
        let (ok, after) = keytest_coherent(&tk, dk.clone(), &mut rng).unwrap();
        assert!(ok);
        assert!(states_equal(&dk.state, &after.state, 1e-9).unwrap());
    }
}
