//! ABE with collusion-resistant leasing and classical deletion
//! certificates.
//!
//! A key is an SKE-CD ciphertext of `0^λ` whose position `i` is signed by
//! the multi-input ABE tokens `sk_{i,0}, sk_{i,1}` for slot attributes
//! `t ∥ b` (slot 1 also carries `y`). A ciphertext decrypts only for `k`
//! tokens sharing one tag `t`, so tokens from different leases never mix.
//! Deletion is a Hadamard measurement of every block and the result is a
//! classical certificate.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::policy;
use crate::prims::miabe::{self, MiAbeCiphertext, MiAbeMsk, MiAbeParams, MiAbePk, MiRelation};
use crate::prims::{CcHandle, CcParams, CcRegistry};
use crate::qreg::{SimConfig, SparseState};
use crate::signed::{self, ct_name};
use crate::skecd::{self, SkecdParams, SkecdSecretKey};

pub fn abe_sk_name(i: usize) -> String {
    format!("ABE.SK_{}", i + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cr2Params {
    pub lambda: usize,
    pub n: usize,
    pub h: usize,
    /// Width of key attributes `y`.
    pub attr_bits: usize,
    pub msg_bits: usize,
}

impl Cr2Params {
    pub fn new(lambda: usize, n: usize, h: usize, attr_bits: usize) -> Self {
        Self {
            lambda,
            n,
            h,
            attr_bits,
            msg_bits: lambda,
        }
    }

    pub fn skecd(&self) -> SkecdParams {
        SkecdParams {
            lambda: self.lambda,
            n: self.n,
            h: self.h,
            msg_bits: self.lambda,
        }
    }

    /// Slot count `k = ℓ_ct`.
    pub fn slots(&self) -> usize {
        self.skecd().ct_bits()
    }

    pub fn miabe(&self) -> MiAbeParams {
        let mut slot_bits = vec![self.lambda + 1; self.slots()];
        slot_bits[0] += self.attr_bits;
        MiAbeParams {
            lambda: self.lambda,
            slot_bits,
            msg_bits: self.msg_bits,
        }
    }

    /// Token width of each slot.
    pub fn token_bits(&self) -> Vec<usize> {
        let p = self.miabe();
        (0..p.slots()).map(|i| p.token_bits(i)).collect()
    }

    pub fn pp_d(&self) -> CcParams {
        CcParams {
            input_bits: self.slots(),
            output_bits: self.lambda,
            size: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.skecd().validate()?;
        policy::check_attr_bits(self.attr_bits)?;
        if self.msg_bits == 0 {
            return Err(Error::InvalidParams("message width must be positive".into()));
        }
        Ok(())
    }
}

/// MI-ABE ciphertext attribute `x̃ ∥ C̃`.
pub type Cr2Attr = (Bits, CcHandle);

#[derive(Clone, Debug)]
pub struct Cr2Ek {
    abe: MiAbePk<Cr2Attr>,
    registry: Arc<CcRegistry>,
    params: Cr2Params,
}

#[derive(Clone, Debug)]
pub struct Cr2Msk {
    abe: MiAbeMsk<Cr2Attr>,
    skecd: SkecdSecretKey,
    params: Cr2Params,
    config: SimConfig,
}

#[derive(Clone, Debug)]
pub struct Cr2Key {
    pub state: SparseState,
    pub slots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cr2Vk {
    pub x: Bits,
    pub theta: Bits,
    pub xors: Vec<Option<Bits>>,
}

#[derive(Clone, Debug)]
pub struct Cr2Ct {
    pub abe: MiAbeCiphertext<Cr2Attr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cr2Cert {
    pub c: Bits,
    pub d: Vec<Bits>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertJson {
    slots: Vec<SlotJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotJson {
    c: u8,
    d: String,
}

impl Cr2Cert {
    pub fn to_json(&self) -> String {
        let slots = self
            .d
            .iter()
            .enumerate()
            .map(|(i, d)| SlotJson {
                c: self.c.get(i) as u8,
                d: d.to_hex(),
            })
            .collect();
        serde_json::to_string(&CertJson { slots }).expect("certificate serializes")
    }

    /// Parses a certificate whose slot `i` has a `widths[i]`-bit `d_i`.
    pub fn from_json(s: &str, widths: &[usize]) -> Result<Self> {
        let raw: CertJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.slots.len() != widths.len() {
            return Err(Error::Arity {
                expected: widths.len(),
                actual: raw.slots.len(),
            });
        }
        let mut c = Bits::zeros(widths.len());
        let mut d = Vec::with_capacity(widths.len());
        for (i, (slot, &w)) in raw.slots.iter().zip(widths).enumerate() {
            match slot.c {
                0 => {}
                1 => c.set(i, true),
                v => return Err(Error::Parse(format!("slot {} has c = {v}", i + 1))),
            }
            d.push(Bits::from_hex(&slot.d, w)?);
        }
        Ok(Self { c, d })
    }
}

fn relation(params: Cr2Params, registry: Arc<CcRegistry>) -> MiRelation<Cr2Attr> {
    let lambda = params.lambda;
    let attr_bits = params.attr_bits;
    Arc::new(move |x: &Cr2Attr, ys: &[Bits]| {
        let t = ys[0].slice(0, lambda);
        if ys.iter().any(|y| y.slice(0, lambda) != t) {
            return false;
        }
        let u = Bits::from_bools(ys.iter().map(|y| y.get(lambda)));
        let y = ys[0].slice(lambda + 1, attr_bits);
        matches!(registry.eval(x.1, &u), Ok(None)) && policy::allows(&x.0, &y)
    })
}

pub fn setup<R: Rng + ?Sized>(params: Cr2Params, rng: &mut R) -> Result<(Cr2Ek, Cr2Msk)> {
    setup_with(params, SimConfig::default(), rng)
}

pub fn setup_with<R: Rng + ?Sized>(params: Cr2Params, config: SimConfig, rng: &mut R) -> Result<(Cr2Ek, Cr2Msk)> {
    params.validate()?;
    let registry = Arc::new(CcRegistry::new());
    let (pk, abe_msk) = miabe::setup(params.miabe(), relation(params, Arc::clone(&registry)), rng);
    let skecd = skecd::kg(params.skecd(), rng)?;
    Ok((
        Cr2Ek {
            abe: pk,
            registry,
            params,
        },
        Cr2Msk {
            abe: abe_msk,
            skecd,
            params,
            config,
        },
    ))
}

impl Cr2Ek {
    pub fn params(&self) -> Cr2Params {
        self.params
    }

    pub fn registry(&self) -> &Arc<CcRegistry> {
        &self.registry
    }

    /// Encrypts under the policy table `x̃`.
    pub fn enc(&self, policy_table: &Bits, m: &Bits) -> Result<Cr2Ct> {
        let expected = policy::table_bits(self.params.attr_bits);
        if policy_table.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: policy_table.len(),
            });
        }
        let c = self.registry.simulate(self.params.pp_d());
        Ok(Cr2Ct {
            abe: self.abe.enc((policy_table.clone(), c), m)?,
        })
    }
}

impl Cr2Msk {
    pub fn params(&self) -> Cr2Params {
        self.params
    }

    /// Slot tokens `sk_{i,0}, sk_{i,1}` under a fresh tag.
    fn tokens<R: Rng + ?Sized>(&self, y: &Bits, rng: &mut R) -> Result<Vec<[Bits; 2]>> {
        if y.len() != self.params.attr_bits {
            return Err(Error::LengthMismatch {
                expected: self.params.attr_bits,
                actual: y.len(),
            });
        }
        let t = Bits::random(self.params.lambda, rng);
        (0..self.params.slots())
            .map(|i| {
                let attr = |b: bool| {
                    let mut a = t.clone();
                    a.push(b);
                    if i == 0 {
                        a.extend(y);
                    }
                    a
                };
                Ok([self.abe.kg(i, &attr(false))?, self.abe.kg(i, &attr(true))?])
            })
            .collect()
    }

    pub fn kg<R: Rng + ?Sized>(&self, y: &Bits, rng: &mut R) -> Result<(Cr2Key, Cr2Vk)> {
        let pairs = self.tokens(y, rng)?;
        let vk = self.skecd.encrypt_classical(&Bits::zeros(self.params.lambda), rng)?;
        let state = signed::sign_state(&vk, &pairs, abe_sk_name, self.config)?;
        let xors = signed::pair_xors(&vk.theta, &pairs);
        Ok((
            Cr2Key {
                state,
                slots: pairs.len(),
            },
            Cr2Vk {
                x: vk.x,
                theta: vk.theta,
                xors,
            },
        ))
    }
}

impl Cr2Key {
    pub fn register_names(&self) -> Vec<String> {
        (0..self.slots).map(ct_name).chain((0..self.slots).map(abe_sk_name)).collect()
    }

    /// MI-ABE decryption with the `k` slot tokens, applied coherently.
    pub fn dec<R: Rng + ?Sized>(self, ct: &Cr2Ct, rng: &mut R) -> Result<(Option<Bits>, Cr2Key)> {
        let slots = self.slots;
        let idx: Vec<usize> = (0..slots)
            .map(|i| self.state.layout().index_of(&abe_sk_name(i)))
            .collect::<Result<_>>()?;
        let msg_bits = ct.abe.params().msg_bits;
        // honest keys take two values per slot
        let opened: RefCell<HashMap<(usize, Bits), Option<Bits>>> = RefCell::default();
        let open = |i: usize, tok: &Bits| {
            opened
                .borrow_mut()
                .entry((i, tok.clone()))
                .or_insert_with(|| ct.abe.open_token(i, tok))
                .clone()
        };
        let (m, state) = signed::decrypt_coherent(self.state, msg_bits, |view| {
            let toks: Vec<Bits> = idx.iter().map(|&j| view.segment(j)).collect();
            ct.abe.dec_with(&toks, open).ok().flatten()
        }, rng)?;
        Ok((m, Cr2Key { state, slots }))
    }

    /// Hadamard-measures every block.
    pub fn del<R: Rng + ?Sized>(self, rng: &mut R) -> Result<Cr2Cert> {
        let names = self.register_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let (outcomes, _) = signed::measure_hadamard_all(self.state, &refs, rng)?;
        let c = Bits::from_bools((0..self.slots).map(|i| outcomes[&ct_name(i)].get(0)));
        let d = (0..self.slots).map(|i| outcomes[&abe_sk_name(i)].clone()).collect();
        Ok(Cr2Cert { c, d })
    }
}

/// `x[i] = c_i ⊕ d_i·(sk_{i,0} ⊕ sk_{i,1})` at every `θ[i] = 1`.
pub fn vrfy(vk: &Cr2Vk, cert: &Cr2Cert) -> bool {
    let k = vk.x.len();
    if cert.c.len() != k || cert.d.len() != k || vk.xors.len() != k {
        return false;
    }
    (0..k).all(|i| match &vk.xors[i] {
        Some(xor) if vk.theta.get(i) => {
            cert.d[i].len() == xor.len() && vk.x.get(i) == (cert.c.get(i) ^ cert.d[i].dot(xor))
        }
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn small() -> Cr2Params {
        Cr2Params::new(8, 4, 2, 2)
    }

    fn y() -> Bits {
        Bits::parse("10").unwrap()
    }

    #[test]
    fn shapes() {
        let p = small();
        assert_eq!(p.slots(), 4 + 2 * 8 + 4 + 8);
        let w = p.token_bits();
        assert_eq!(w[0], 8 + 9 + 2);
        assert!(w[1..].iter().all(|&x| x == 8 + 9));
    }

    #[test]
    fn honest_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (ek, msk) = setup(small(), &mut rng).unwrap();
        let (key, vk) = msk.kg(&y(), &mut rng).unwrap();
        assert_eq!(key.state.term_count(), 4);
        let m = Bits::random(8, &mut rng);
        let ok = ek.enc(&policy::allow_only(2, &[y()]), &m).unwrap();
        let no = ek.enc(&policy::allow_only(2, &[Bits::parse("01").unwrap()]), &m).unwrap();
        let (out, key) = key.dec(&ok, &mut rng).unwrap();
        assert_eq!(out, Some(m));
        let (out, key) = key.dec(&no, &mut rng).unwrap();
        assert_eq!(out, None);
        let cert = key.del(&mut rng).unwrap();
        assert!(vrfy(&vk, &cert));
    }

    #[test]
    fn theta_zero_slots_hold_one_token() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, msk) = setup(small(), &mut rng).unwrap();
        let (key, vk) = msk.kg(&y(), &mut rng).unwrap();
        for i in 0..key.slots {
            let vals = key.state.segment_values(&abe_sk_name(i)).unwrap();
            let theta = vk.theta.get(i);
            assert_eq!(vals.len(), if theta { 2 } else { 1 });
            assert_eq!(vk.xors[i].is_some(), theta);
            let cts = key.state.segment_values(&ct_name(i)).unwrap();
            if !theta {
                assert_eq!(cts.into_iter().next().unwrap().get(0), vk.x.get(i));
            }
        }
    }

    #[test]
    fn mixing_leases_fails() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (ek, msk) = setup(small(), &mut rng).unwrap();
        let a = msk.tokens(&y(), &mut rng).unwrap();
        let b = msk.tokens(&y(), &mut rng).unwrap();
        let m = Bits::random(8, &mut rng);
        let ct = ek.enc(&policy::allow_only(2, &[y()]), &m).unwrap();
        let pick = |src: &[[Bits; 2]]| src.iter().map(|p| p[0].clone()).collect::<Vec<_>>();
        assert_eq!(ct.abe.dec(&pick(&a)).unwrap(), Some(m.clone()));
        let mut mixed = pick(&a);
        mixed[3] = b[3][0].clone();
        assert_eq!(ct.abe.dec(&mixed).unwrap(), None);
        assert!(ct.abe.dec(&mixed[1..]).is_err());
    }

    #[test]
    fn cert_json_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (_, msk) = setup(small(), &mut rng).unwrap();
        let (key, vk) = msk.kg(&y(), &mut rng).unwrap();
        let cert = key.del(&mut rng).unwrap();
        let widths = small().token_bits();
        let json = cert.to_json();
        assert!(json.starts_with("{\"slots\":[{\"c\":"));
        assert_eq!(Cr2Cert::from_json(&json, &widths).unwrap(), cert);
        assert!(Cr2Cert::from_json(&json, &widths[1..]).is_err());
        let c0 = if cert.c.get(0) { "{\"c\":1" } else { "{\"c\":0" };
        assert!(Cr2Cert::from_json(&json.replacen(c0, "{\"c\":2", 1), &widths).is_err());
        let mut bad = cert.clone();
        let i = vk.theta.first_one().unwrap();
        bad.c.flip(i);
        assert!(!vrfy(&vk, &bad));
    }

    #[test]
    fn computational_measurement_then_guess_fails_often() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (_, msk) = setup(small(), &mut rng).unwrap();
        let trials = 400;
        let mut passes = 0;
        for _ in 0..trials {
            let (key, vk) = msk.kg(&y(), &mut rng).unwrap();
            let names = key.register_names();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let (outcome, _) = key.state.measure_computational(&refs, &mut rng).unwrap();
            let c = Bits::from_bools((0..key.slots).map(|i| outcome.segment(&ct_name(i)).unwrap().get(0)));
            let d = (0..key.slots)
                .map(|i| Bits::random(outcome.segment(&abe_sk_name(i)).unwrap().len(), &mut rng))
                .collect();
            passes += vrfy(&vk, &Cr2Cert { c, d }) as usize;
        }
        // each of the h = 2 checks passes with probability 1/2
        let rate = passes as f64 / trials as f64;
        assert!((rate - 0.25).abs() < 0.08, "{rate}");
    }
}
