use rand::Rng;

use super::hash::{expand, mac};
use crate::bits::Bits;
use crate::error::{Error, Result};

/// Authenticated secret-key encryption. A ciphertext is
/// `nonce(λ) ∥ (m ⊕ stream) ∥ tag(λ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeKey {
    key: Bits,
}

impl SkeKey {
    pub fn generate<R: Rng + ?Sized>(lambda: usize, rng: &mut R) -> Self {
        Self {
            key: Bits::random(lambda, rng),
        }
    }

    pub fn from_bits(key: Bits) -> Self {
        Self { key }
    }

    pub fn lambda(&self) -> usize {
        self.key.len()
    }

    pub fn bits(&self) -> &Bits {
        &self.key
    }

    pub fn ciphertext_bits(&self, msg_bits: usize) -> usize {
        2 * self.key.len() + msg_bits
    }

    pub fn encrypt<R: Rng + ?Sized>(&self, m: &Bits, rng: &mut R) -> Bits {
        let nonce = Bits::random(self.key.len(), rng);
        let stream = expand("ske-stream", &[&self.key, &nonce], m.len());
        let body = m.xor(&stream);
        let tag = mac(&self.key, "ske-tag", &[&nonce, &body]);
        Bits::concat_all([&nonce, &body, &tag])
    }

    pub fn decrypt(&self, ct: &Bits) -> Result<Bits> {
        let lambda = self.key.len();
        if ct.len() < 2 * lambda {
            return Err(Error::LengthMismatch {
                expected: 2 * lambda,
                actual: ct.len(),
            });
        }
        let body_len = ct.len() - 2 * lambda;
        let nonce = ct.slice(0, lambda);
        let body = ct.slice(lambda, body_len);
        let tag = ct.slice(lambda + body_len, lambda);
        if mac(&self.key, "ske-tag", &[&nonce, &body]) != tag {
            return Err(Error::Authentication);
        }
        let stream = expand("ske-stream", &[&self.key, &nonce], body_len);
        Ok(body.xor(&stream))
    }
}
