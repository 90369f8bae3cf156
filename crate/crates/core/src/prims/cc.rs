use std::sync::{Arc, RwLock};

use crate::bits::Bits;
use crate::error::{Error, Result};

pub type Program = Arc<dyn Fn(&Bits) -> Bits + Send + Sync>;

/// Public circuit parameters handed to the simulator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CcParams {
    pub input_bits: usize,
    pub output_bits: usize,
    pub size: usize,
}

/// Opaque reference to an obfuscated compute-and-compare program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CcHandle(u64);

impl CcHandle {
    pub fn id(&self) -> u64 {
        self.0
    }
}

enum Entry {
    Real { program: Program, lock: Bits, msg: Bits },
    Sim { params: CcParams },
}

/// Ideal compute-and-compare obfuscation: programs are sealed in an
/// append-only table and only reachable through [`CcRegistry::eval`].
#[derive(Default)]
pub struct CcRegistry {
    entries: RwLock<Vec<Entry>>,
}

impl std::fmt::Debug for CcRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CcRegistry")
            .field("entries", &self.len())
            .finish()
    }
}

impl CcRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, e: Entry) -> CcHandle {
        let mut entries = self.entries.write().expect("registry lock");
        entries.push(e);
        CcHandle(entries.len() as u64 - 1)
    }

    /// Obfuscates `CC[P, lock, m]`.
    pub fn obfuscate(&self, program: Program, lock: Bits, msg: Bits) -> CcHandle {
        self.push(Entry::Real { program, lock, msg })
    }

    /// Simulated program; evaluates to ⊥ everywhere.
    pub fn simulate(&self, params: CcParams) -> CcHandle {
        self.push(Entry::Sim { params })
    }

    /// `m` if `P(x) = lock`, else `None` (⊥).
    pub fn eval(&self, handle: CcHandle, x: &Bits) -> Result<Option<Bits>> {
        let entries = self.entries.read().expect("registry lock");
        match entries.get(handle.0 as usize) {
            None => Err(Error::UnknownHandle(handle.0)),
            Some(Entry::Sim { .. }) => Ok(None),
            Some(Entry::Real { program, lock, msg }) => {
                Ok((program(x) == *lock).then(|| msg.clone()))
            }
        }
    }

    pub fn params(&self, handle: CcHandle) -> Result<Option<CcParams>> {
        let entries = self.entries.read().expect("registry lock");
        match entries.get(handle.0 as usize) {
            None => Err(Error::UnknownHandle(handle.0)),
            Some(Entry::Sim { params }) => Ok(Some(*params)),
            Some(Entry::Real { .. }) => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn identity() -> Program {
        Arc::new(|x: &Bits| x.clone())
    }

    #[test]
    fn identity_program_unlocks_only_on_lock() {
        let reg = CcRegistry::new();
        let lock = Bits::parse("1010").unwrap();
        let m = Bits::parse("111").unwrap();
        let h = reg.obfuscate(identity(), lock.clone(), m.clone());
        assert_eq!(reg.eval(h, &lock).unwrap(), Some(m));
        assert_eq!(reg.eval(h, &Bits::parse("1011").unwrap()).unwrap(), None);
    }

    #[test]
    fn simulated_handle_is_bottom() {
        let reg = CcRegistry::new();
        let pp = CcParams {
            input_bits: 4,
            output_bits: 4,
            size: 0,
        };
        let h = reg.simulate(pp);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..100 {
            assert_eq!(reg.eval(h, &Bits::random(4, &mut rng)).unwrap(), None);
        }
        assert_eq!(reg.params(h).unwrap(), Some(pp));
        assert_eq!(reg.eval(CcHandle(99), &Bits::zeros(4)), Err(Error::UnknownHandle(99)));
    }

    #[test]
    fn real_handle_matches_direct_evaluation() {
        let reg = CcRegistry::new();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        // P(x) = low two bits of x, so the lock matches on a quarter of inputs
        let program: Program = Arc::new(|x: &Bits| x.slice(x.len() - 2, 2));
        let lock = Bits::parse("01").unwrap();
        let m = Bits::parse("1").unwrap();
        let h = reg.obfuscate(program.clone(), lock.clone(), m.clone());
        let mut hits = 0;
        for _ in 0..10_000 {
            let x = Bits::random(10, &mut rng);
            let direct = (program(&x) == lock).then(|| m.clone());
            hits += direct.is_some() as usize;
            assert_eq!(reg.eval(h, &x).unwrap(), direct);
        }
        assert!(hits > 2000 && hits < 3000);
    }
}
