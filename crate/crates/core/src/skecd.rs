//! BB84-based secret-key encryption with certified deletion.
//!
//! A ciphertext has `n` quantum positions followed by a classical part.
//! The classical part is `SKE.Enc(sk, θ[1..n] ∥ (m ⊕ mask))` where the mask
//! hashes the bits of `x` at the computational-basis quantum positions.
//! Measuring those positions is needed to decrypt, and measuring the
//! Hadamard positions is needed to delete, which is where the
//! certified-deletion property comes from.

use rand::seq::index::sample;
use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prims::{self, SkeKey};
use crate::qreg::{SimConfig, SparseState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkecdParams {
    pub lambda: usize,
    /// Quantum positions.
    pub n: usize,
    /// Hadamard-basis positions among the `n`.
    pub h: usize,
    pub msg_bits: usize,
}

impl SkecdParams {
    pub fn validate(&self) -> Result<()> {
        if self.lambda == 0 || self.n == 0 || self.msg_bits == 0 {
            return Err(Error::InvalidParams(
                "lambda, n and message width must be positive".into(),
            ));
        }
        if self.h > self.n {
            return Err(Error::InvalidParams(format!(
                "Hadamard weight {} exceeds {} quantum positions",
                self.h, self.n
            )));
        }
        Ok(())
    }

    /// Bits of the classical part: nonce, θ, masked message and tag.
    pub fn classical_bits(&self) -> usize {
        2 * self.lambda + self.n + self.msg_bits
    }

    /// `ℓ_ct`, all positions.
    pub fn ct_bits(&self) -> usize {
        self.n + self.classical_bits()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkecdSecretKey {
    ske: SkeKey,
    params: SkecdParams,
}

/// `(x, θ)` with `θ` zero on every classical position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkecdVerificationKey {
    pub x: Bits,
    pub theta: Bits,
}

#[derive(Clone, Debug)]
pub struct SkecdCiphertext {
    /// Segments `Q_1 … Q_n`.
    pub quantum: SparseState,
    pub classical: Bits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeletionCertificate(pub Bits);

pub const MSG: &str = "MSG";

pub fn kg<R: Rng + ?Sized>(params: SkecdParams, rng: &mut R) -> Result<SkecdSecretKey> {
    params.validate()?;
    Ok(SkecdSecretKey {
        ske: SkeKey::generate(params.lambda, rng),
        params,
    })
}

fn mask(x_q: &Bits, theta_q: &Bits, msg_bits: usize) -> Bits {
    let selected = Bits::from_bools((0..x_q.len()).filter(|&i| !theta_q.get(i)).map(|i| x_q.get(i)));
    prims::expand("skecd-mask", &[&selected], msg_bits)
}

impl SkecdSecretKey {
    pub fn params(&self) -> SkecdParams {
        self.params
    }

    pub fn ske_key(&self) -> &SkeKey {
        &self.ske
    }

    /// Samples the classical description `(x, θ)` of a ciphertext of `m`.
    pub fn encrypt_classical<R: Rng + ?Sized>(&self, m: &Bits, rng: &mut R) -> Result<SkecdVerificationKey> {
        let p = self.params;
        if m.len() != p.msg_bits {
            return Err(Error::LengthMismatch {
                expected: p.msg_bits,
                actual: m.len(),
            });
        }
        let mut theta_q = Bits::zeros(p.n);
        for i in sample(rng, p.n, p.h) {
            theta_q.set(i, true);
        }
        let x_q = Bits::random(p.n, rng);
        let payload = theta_q.concat(&m.xor(&mask(&x_q, &theta_q, p.msg_bits)));
        let classical = self.ske.encrypt(&payload, rng);
        debug_assert_eq!(classical.len(), p.classical_bits());
        Ok(SkecdVerificationKey {
            x: x_q.concat(&classical),
            theta: theta_q.concat(&Bits::zeros(classical.len())),
        })
    }

    pub fn enc<R: Rng + ?Sized>(
        &self,
        m: &Bits,
        rng: &mut R,
    ) -> Result<(SkecdCiphertext, SkecdVerificationKey)> {
        let vk = self.encrypt_classical(m, rng)?;
        let ct = SkecdCiphertext::from_vk(&vk, self.params, SimConfig::default())?;
        Ok((ct, vk))
    }

    /// Classical decryption of any string in the ciphertext's support.
    pub fn cdec(&self, u: &Bits) -> Result<Bits> {
        let p = self.params;
        if u.len() != p.ct_bits() {
            return Err(Error::LengthMismatch {
                expected: p.ct_bits(),
                actual: u.len(),
            });
        }
        let payload = self.ske.decrypt(&u.slice(p.n, p.classical_bits()))?;
        let theta_q = payload.slice(0, p.n);
        let masked = payload.slice(p.n, p.msg_bits);
        Ok(masked.xor(&mask(&u.slice(0, p.n), &theta_q, p.msg_bits)))
    }

    /// Coherent decryption: XORs the ⊥-encoded CDec output into a MSG
    /// register, measures it and discards it.
    pub fn dec<R: Rng + ?Sized>(
        &self,
        ct: SkecdCiphertext,
        rng: &mut R,
    ) -> Result<(Option<Bits>, SkecdCiphertext)> {
        let p = self.params;
        let names: Vec<String> = ct.quantum.layout().segments().iter().map(|s| s.name().to_string()).collect();
        let src: Vec<&str> = names.iter().map(String::as_str).collect();
        let classical = ct.classical.clone();
        let mut state = ct.quantum;
        state.append_segment(MSG, prims::bottom_width(p.msg_bits))?;
        state.apply_xor_oracle(&src, MSG, |q| {
            let out = self.cdec(&q.concat(&classical)).ok();
            prims::encode_bottom(out.as_ref(), p.msg_bits)
        })?;
        let (outcome, mut post) = state.measure_computational(&[MSG], rng)?;
        post.discard_definite(MSG)?;
        Ok((
            prims::decode_bottom(&outcome.bits),
            SkecdCiphertext {
                quantum: post,
                classical,
            },
        ))
    }
}

impl SkecdCiphertext {
    pub fn from_vk(vk: &SkecdVerificationKey, params: SkecdParams, config: SimConfig) -> Result<Self> {
        let n = params.n;
        let quantum = SparseState::prepare_bb84_with(
            config,
            &vk.x.slice(0, n),
            &vk.theta.slice(0, n),
            |i| format!("Q_{}", i + 1),
        )?;
        Ok(Self {
            quantum,
            classical: vk.x.slice(n, vk.x.len() - n),
        })
    }

    pub fn classical_hex(&self) -> String {
        self.classical.to_hex()
    }

    /// Parses a classical part serialized by [`SkecdCiphertext::classical_hex`].
    pub fn parse_classical(hex: &str, params: SkecdParams) -> Result<Bits> {
        Bits::from_hex(hex, params.classical_bits())
    }

    /// Rebuilds a ciphertext from a state dump and a classical part.
    pub fn from_parts(quantum_json: &str, classical_hex: &str, params: SkecdParams) -> Result<Self> {
        let quantum = SparseState::from_json(quantum_json)?;
        if quantum.layout().total_bits() != params.n {
            return Err(Error::LengthMismatch {
                expected: params.n,
                actual: quantum.layout().total_bits(),
            });
        }
        Ok(Self {
            quantum,
            classical: Self::parse_classical(classical_hex, params)?,
        })
    }
}

/// Measures every qubit in the Hadamard basis; the classical positions
/// behave as basis states and yield uniform bits.
pub fn del<R: Rng + ?Sized>(ct: SkecdCiphertext, rng: &mut R) -> Result<DeletionCertificate> {
    let names: Vec<String> = ct.quantum.layout().segments().iter().map(|s| s.name().to_string()).collect();
    let segs: Vec<&str> = names.iter().map(String::as_str).collect();
    let (outcome, _) = ct.quantum.measure_hadamard(&segs, rng)?;
    let tail = Bits::random(ct.classical.len(), rng);
    Ok(DeletionCertificate(outcome.bits.concat(&tail)))
}

/// `⊤` iff the certificate matches `x` at every `θ = 1` position.
pub fn vrfy(vk: &SkecdVerificationKey, cert: &DeletionCertificate) -> bool {
    if cert.0.len() != vk.x.len() || vk.theta.len() != vk.x.len() {
        return false;
    }
    (0..vk.x.len()).all(|i| !vk.theta.get(i) || cert.0.get(i) == vk.x.get(i))
}

/// `(cert, θ)`, usable in place of `(x, θ)` once `cert` verifies.
pub fn alt_vk(theta: &Bits, cert: &DeletionCertificate) -> SkecdVerificationKey {
    SkecdVerificationKey {
        x: cert.0.clone(),
        theta: theta.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qreg::states_equal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params() -> SkecdParams {
        SkecdParams {
            lambda: 32,
            n: 8,
            h: 3,
            msg_bits: 16,
        }
    }

    #[test]
    fn fresh_keys_differ() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = kg(params(), &mut rng).unwrap();
        let b = kg(params(), &mut rng).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.ske_key().lambda(), 32);
        assert_eq!(a.params(), params());
    }

    #[test]
    fn rejects_bad_params() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let p = SkecdParams { h: 9, ..params() };
        assert!(matches!(kg(p, &mut rng), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn ciphertext_shape() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let sk = kg(params(), &mut rng).unwrap();
        let (ct, vk) = sk.enc(&Bits::zeros(16), &mut rng).unwrap();
        let p = params();
        assert_eq!(vk.x.len(), p.ct_bits());
        assert!((p.n..p.ct_bits()).all(|i| !vk.theta.get(i)));
        assert_eq!(vk.theta.slice(0, p.n).weight(), p.h);
        assert_eq!(ct.quantum.term_count(), 1 << p.h);
        assert!(sk.enc(&Bits::zeros(15), &mut rng).is_err());
    }

    #[test]
    fn cdec_on_every_support_term() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sk = kg(params(), &mut rng).unwrap();
        let m = Bits::random(16, &mut rng);
        let (ct, _) = sk.enc(&m, &mut rng).unwrap();
        for (u, _) in ct.quantum.terms() {
            assert_eq!(sk.cdec(&u.concat(&ct.classical)).unwrap(), m);
        }
    }

    #[test]
    fn cdec_ignores_hadamard_positions_only() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let sk = kg(params(), &mut rng).unwrap();
        let m = Bits::random(16, &mut rng);
        let (_, vk) = sk.enc(&m, &mut rng).unwrap();
        let had = (0..8).find(|&i| vk.theta.get(i)).unwrap();
        let comp = (0..8).find(|&i| !vk.theta.get(i)).unwrap();
        let mut u = vk.x.clone();
        u.flip(had);
        assert_eq!(sk.cdec(&u).unwrap(), m);
        let mut u = vk.x.clone();
        u.flip(comp);
        assert_ne!(sk.cdec(&u).unwrap(), m);
        let mut u = vk.x.clone();
        u.flip(20);
        assert_eq!(sk.cdec(&u), Err(Error::Authentication));
    }

    #[test]
    fn dec_round_trip_is_non_destructive() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let sk = kg(params(), &mut rng).unwrap();
        for _ in 0..50 {
            let m = Bits::random(16, &mut rng);
            let (ct, _) = sk.enc(&m, &mut rng).unwrap();
            let before = ct.quantum.clone();
            let (out, ct) = sk.dec(ct, &mut rng).unwrap();
            assert_eq!(out, Some(m.clone()));
            assert!(states_equal(&before, &ct.quantum, 1e-9).unwrap());
            let (again, _) = sk.dec(ct, &mut rng).unwrap();
            assert_eq!(again, Some(m));
        }
    }

    #[test]
    fn wrong_key_gives_bottom() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let sk = kg(params(), &mut rng).unwrap();
        let other = kg(params(), &mut rng).unwrap();
        let (ct, _) = sk.enc(&Bits::ones(16), &mut rng).unwrap();
        assert_eq!(other.dec(ct, &mut rng).unwrap().0, None);
    }

    #[test]
    fn del_then_vrfy() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let sk = kg(params(), &mut rng).unwrap();
        for _ in 0..200 {
            let (ct, vk) = sk.enc(&Bits::random(16, &mut rng), &mut rng).unwrap();
            let cert = del(ct, &mut rng).unwrap();
            assert_eq!(cert.0.len(), params().ct_bits());
            assert!(vrfy(&vk, &cert));
            let had = (0..8).find(|&i| vk.theta.get(i)).unwrap();
            let comp = (0..8).find(|&i| !vk.theta.get(i)).unwrap();
            let mut bad = cert.clone();
            bad.0.flip(had);
            assert!(!vrfy(&vk, &bad));
            let mut ok = cert.clone();
            ok.0.flip(comp);
            assert!(vrfy(&vk, &ok));
        }
    }

    #[test]
    fn classical_part_hex_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let sk = kg(params(), &mut rng).unwrap();
        let m = Bits::random(16, &mut rng);
        let (ct, _) = sk.enc(&m, &mut rng).unwrap();
        let back = SkecdCiphertext::from_parts(&ct.quantum.to_json(), &ct.classical_hex(), params()).unwrap();
        assert_eq!(back.classical, ct.classical);
        assert_eq!(sk.dec(back, &mut rng).unwrap().0, Some(m));
        assert!(SkecdCiphertext::parse_classical("zz", params()).is_err());
    }

    #[test]
    fn alt_vk_matches_on_random_certs() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let sk = kg(params(), &mut rng).unwrap();
        let (ct, vk) = sk.enc(&Bits::zeros(16), &mut rng).unwrap();
        let cert = del(ct, &mut rng).unwrap();
        let alt = alt_vk(&vk.theta, &cert);
        assert!(vrfy(&alt, &cert));
        for _ in 0..1000 {
            // random certificates near the honest one hit both verdicts
            let mut c = cert.clone();
            for i in 0..8 {
                if rng.gen_bool(0.2) {
                    c.0.flip(i);
                }
            }
            assert_eq!(vrfy(&vk, &c), vrfy(&alt, &c));
        }
    }
}
