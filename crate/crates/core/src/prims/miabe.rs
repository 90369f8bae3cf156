use std::sync::Arc;

use rand::Rng;

use super::hash::mac;
use crate::bits::Bits;
use crate::error::{Error, Result};

/// `true` when `R(x, y_1, …, y_k) = 0`.
pub type MiRelation<X> = Arc<dyn Fn(&X, &[Bits]) -> bool + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiAbeParams {
    pub lambda: usize,
    /// Attribute width of each slot.
    pub slot_bits: Vec<usize>,
    pub msg_bits: usize,
}

impl MiAbeParams {
    pub fn slots(&self) -> usize {
        self.slot_bits.len()
    }

    /// Token width of slot `i`: `λ + |y_i|`.
    pub fn token_bits(&self, i: usize) -> usize {
        self.lambda + self.slot_bits[i]
    }
}

struct Authority<X> {
    params: MiAbeParams,
    mac_key: Bits,
    relation: MiRelation<X>,
}

pub struct MiAbePk<X>(Arc<Authority<X>>);
pub struct MiAbeMsk<X>(Arc<Authority<X>>);

impl<X> Clone for MiAbePk<X> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<X> Clone for MiAbeMsk<X> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<X> std::fmt::Debug for MiAbePk<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("MiAbePk").field(&self.0.params.slots()).finish()
    }
}

impl<X> std::fmt::Debug for MiAbeMsk<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("MiAbeMsk").field(&self.0.params.slots()).finish()
    }
}

pub struct MiAbeCiphertext<X> {
    authority: Arc<Authority<X>>,
    attribute: X,
    msg: Bits,
}

impl<X: Clone> Clone for MiAbeCiphertext<X> {
    fn clone(&self) -> Self {
        Self {
            authority: Arc::clone(&self.authority),
            attribute: self.attribute.clone(),
            msg: self.msg.clone(),
        }
    }
}

impl<X: std::fmt::Debug> std::fmt::Debug for MiAbeCiphertext<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MiAbeCiphertext")
            .field("attribute", &self.attribute)
            .finish_non_exhaustive()
    }
}

pub fn setup<X, R: Rng + ?Sized>(
    params: MiAbeParams,
    relation: MiRelation<X>,
    rng: &mut R,
) -> (MiAbePk<X>, MiAbeMsk<X>) {
    let authority = Arc::new(Authority {
        mac_key: Bits::random(params.lambda, rng),
        params,
        relation,
    });
    (MiAbePk(Arc::clone(&authority)), MiAbeMsk(authority))
}

fn slot_tag(i: usize) -> Bits {
    Bits::from_u64(i as u64, 32)
}

impl<X> MiAbeMsk<X> {
    pub fn params(&self) -> &MiAbeParams {
        &self.0.params
    }

    /// Slot-`i` token `MAC(i, y_i) ∥ y_i`.
    pub fn kg(&self, i: usize, y: &Bits) -> Result<Bits> {
        let p = &self.0.params;
        if i >= p.slots() {
            return Err(Error::SlotOutOfRange {
                index: i,
                slots: p.slots(),
            });
        }
        if y.len() != p.slot_bits[i] {
            return Err(Error::LengthMismatch {
                expected: p.slot_bits[i],
                actual: y.len(),
            });
        }
        let tag = mac(&self.0.mac_key, "miabe-kg", &[&slot_tag(i), y]);
        Ok(tag.concat(y))
    }

    pub fn public_key(&self) -> MiAbePk<X> {
        MiAbePk(Arc::clone(&self.0))
    }
}

impl<X> MiAbePk<X> {
    pub fn params(&self) -> &MiAbeParams {
        &self.0.params
    }

    pub fn enc(&self, x: X, m: &Bits) -> Result<MiAbeCiphertext<X>> {
        if m.len() != self.0.params.msg_bits {
            return Err(Error::LengthMismatch {
                expected: self.0.params.msg_bits,
                actual: m.len(),
            });
        }
        Ok(MiAbeCiphertext {
            authority: Arc::clone(&self.0),
            attribute: x,
            msg: m.clone(),
        })
    }
}

impl<X> MiAbeCiphertext<X> {
    pub fn attribute(&self) -> &X {
        &self.attribute
    }

    pub fn params(&self) -> &MiAbeParams {
        &self.authority.params
    }

    /// Decrypts with one token per slot. A wrong token count is an error;
    /// a forged token or an unsatisfied relation gives `None`.
    pub fn dec(&self, tokens: &[Bits]) -> Result<Option<Bits>> {
        self.dec_with(tokens, |i, tok| self.open_token(i, tok))
    }

    /// Slot-`i` attribute of a genuine token.
    pub fn open_token(&self, i: usize, tok: &Bits) -> Option<Bits> {
        let p = &self.authority.params;
        if i >= p.slots() || tok.len() != p.token_bits(i) {
            return None;
        }
        let tag = tok.slice(0, p.lambda);
        let y = tok.slice(p.lambda, p.slot_bits[i]);
        (mac(&self.authority.mac_key, "miabe-kg", &[&slot_tag(i), &y]) == tag).then_some(y)
    }

    /// [`Self::dec`] with a caller-supplied token opener, for callers that
    /// cache [`Self::open_token`].
    pub fn dec_with<F>(&self, tokens: &[Bits], open: F) -> Result<Option<Bits>>
    where
        F: Fn(usize, &Bits) -> Option<Bits>,
    {
        let p = &self.authority.params;
        if tokens.len() != p.slots() {
            return Err(Error::Arity {
                expected: p.slots(),
                actual: tokens.len(),
            });
        }
        let mut attrs = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            match open(i, tok) {
                Some(y) => attrs.push(y),
                None => return Ok(None),
            }
        }
        Ok((self.authority.relation)(&self.attribute, &attrs).then(|| self.msg.clone()))
    }
}
