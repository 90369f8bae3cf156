use std::sync::Arc;

use rand::Rng;

use super::hash::mac;
use crate::bits::Bits;
use crate::error::{Error, Result};

/// `F(x, y)`, with `None` standing for ⊥.
pub type Functionality<X> = Arc<dyn Fn(&X, &Bits) -> Option<Bits> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkfeParams {
    pub lambda: usize,
    pub attr_bits: usize,
    pub out_bits: usize,
}

impl SkfeParams {
    /// `λ + |y|`.
    pub fn token_bits(&self) -> usize {
        self.lambda + self.attr_bits
    }
}

struct Authority<X> {
    params: SkfeParams,
    mac_key: Bits,
    func: Functionality<X>,
}

pub struct SkfeMsk<X>(Arc<Authority<X>>);

impl<X> Clone for SkfeMsk<X> {
    fn clone(&self) -> Self {
        Self(Arc::clone(&self.0))
    }
}

impl<X> std::fmt::Debug for SkfeMsk<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("SkfeMsk").field(&self.0.params).finish()
    }
}

pub struct SkfeCiphertext<X> {
    authority: Arc<Authority<X>>,
    plaintext: X,
}

impl<X: Clone> Clone for SkfeCiphertext<X> {
    fn clone(&self) -> Self {
        Self {
            authority: Arc::clone(&self.authority),
            plaintext: self.plaintext.clone(),
        }
    }
}

impl<X> std::fmt::Debug for SkfeCiphertext<X> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkfeCiphertext").finish_non_exhaustive()
    }
}

pub fn setup<X, R: Rng + ?Sized>(params: SkfeParams, func: Functionality<X>, rng: &mut R) -> SkfeMsk<X> {
    SkfeMsk(Arc::new(Authority {
        params,
        mac_key: Bits::random(params.lambda, rng),
        func,
    }))
}

impl<X> SkfeMsk<X> {
    pub fn params(&self) -> SkfeParams {
        self.0.params
    }

    /// Token `MAC(y) ∥ y`.
    pub fn kg(&self, y: &Bits) -> Result<Bits> {
        if y.len() != self.0.params.attr_bits {
            return Err(Error::LengthMismatch {
                expected: self.0.params.attr_bits,
                actual: y.len(),
            });
        }
        Ok(mac(&self.0.mac_key, "skfe-kg", &[y]).concat(y))
    }

    pub fn enc(&self, x: X) -> SkfeCiphertext<X> {
        SkfeCiphertext {
            authority: Arc::clone(&self.0),
            plaintext: x,
        }
    }
}

impl<X> SkfeCiphertext<X> {
    /// `F(x, y)` for an authentic token, `None` otherwise.
    pub fn dec(&self, token: &Bits) -> Option<Bits> {
        let p = self.authority.params;
        if token.len() != p.token_bits() {
            return None;
        }
        let y = token.slice(p.lambda, p.attr_bits);
        if mac(&self.authority.mac_key, "skfe-kg", &[&y]) != token.slice(0, p.lambda) {
            return None;
        }
        let out = (self.authority.func)(&self.plaintext, &y)?;
        debug_assert_eq!(out.len(), p.out_bits);
        Some(out)
    }
}
