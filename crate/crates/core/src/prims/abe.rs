use std::sync::Arc;

use rand::Rng;

use super::hash::mac;
use crate::bits::Bits;
use crate::error::{Error, Result};

/// `true` when the pair is decryptable, i.e. `R(x, y) = 0`.
pub type Relation<X> = Arc<dyn Fn(&X, &Bits) -> bool + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AbeParams {
    pub lambda: usize,
    pub attr_bits: usize,
    pub rand_bits: usize,
    pub msg_bits: usize,
}

impl AbeParams {
    /// `L_tok = λ + |y| + |r|`.
    pub fn token_bits(&self) -> usize {
        self.lambda + self.attr_bits + self.rand_bits
    }
}

struct Authority<X> {
    params: AbeParams,
    mac_key: Bits,
    relation: Relation<X>,
}

/// Public key of an ideal ABE instance.
pub struct AbePk<X>(Arc<Authority<X>>);

/// Master secret key of an ideal ABE instance.
pub struct AbeMsk<X>(Arc<Authority<X>>);

impl<X> Clone for AbePk<X> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<X> Clone for AbeMsk<X> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<X> std::fmt::Debug for AbePk<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("AbePk").field(&self.0.params).finish()
    }
}

impl<X> std::fmt::Debug for AbeMsk<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("AbeMsk").field(&self.0.params).finish()
    }
}

/// Sealed ciphertext; the message is only reachable through [`AbeCiphertext::dec`].
pub struct AbeCiphertext<X> {
    authority: Arc<Authority<X>>,
    attribute: X,
    msg: Bits,
}

impl<X: Clone> Clone for AbeCiphertext<X> {
    fn clone(&self) -> Self {
        Self {
            authority: Arc::clone(&self.authority),
            attribute: self.attribute.clone(),
            msg: self.msg.clone(),
        }
    }
}

impl<X: std::fmt::Debug> std::fmt::Debug for AbeCiphertext<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AbeCiphertext")
            .field("attribute", &self.attribute)
            .finish_non_exhaustive()
    }
}

pub fn setup<X, R: Rng + ?Sized>(
    params: AbeParams,
    relation: Relation<X>,
    rng: &mut R,
) -> (AbePk<X>, AbeMsk<X>) {
    let authority = Arc::new(Authority {
        params,
        mac_key: Bits::random(params.lambda, rng),
        relation,
    });
    (AbePk(Arc::clone(&authority)), AbeMsk(authority))
}

fn check(expected: usize, b: &Bits) -> Result<()> {
    if b.len() == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected,
            actual: b.len(),
        })
    }
}

impl<X> AbeMsk<X> {
    pub fn params(&self) -> AbeParams {
        self.0.params
    }

    /// Deterministic in `(msk, y, r)`; token is `MAC(y ∥ r) ∥ y ∥ r`.
    pub fn kg(&self, y: &Bits, r: &Bits) -> Result<Bits> {
        let p = self.0.params;
        check(p.attr_bits, y)?;
        check(p.rand_bits, r)?;
        let tag = mac(&self.0.mac_key, "abe-kg", &[y, r]);
        Ok(Bits::concat_all([&tag, y, r]))
    }

    pub fn public_key(&self) -> AbePk<X> {
        AbePk(Arc::clone(&self.0))
    }
}

impl<X> AbePk<X> {
    pub fn params(&self) -> AbeParams {
        self.0.params
    }

    pub fn enc(&self, x: X, m: &Bits) -> Result<AbeCiphertext<X>> {
        check(self.0.params.msg_bits, m)?;
        Ok(AbeCiphertext {
            authority: Arc::clone(&self.0),
            attribute: x,
            msg: m.clone(),
        })
    }
}

impl<X> AbeCiphertext<X> {
    pub fn attribute(&self) -> &X {
        &self.attribute
    }

    pub fn params(&self) -> AbeParams {
        self.authority.params
    }

    /// The sealed message if the token is authentic and `R(x, y) = 0`.
    pub fn dec(&self, token: &Bits) -> Option<Bits> {
        let p = self.authority.params;
        if token.len() != p.token_bits() {
            return None;
        }
        let tag = token.slice(0, p.lambda);
        let y = token.slice(p.lambda, p.attr_bits);
        let r = token.slice(p.lambda + p.attr_bits, p.rand_bits);
        if mac(&self.authority.mac_key, "abe-kg", &[&y, &r]) != tag {
            return None;
        }
        (self.authority.relation)(&self.attribute, &y).then(|| self.msg.clone())
    }
}
