//! Incremental GF(2) row reduction used by the Hadamard-basis sampler.

use rand::Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Largest rank a basis may track; coordinates are stored as `u64` masks.
pub const MAX_TRACKED_RANK: usize = 63;

#[derive(Clone, Debug)]
struct Row {
    vec: Bits,
    pivot: usize,
    /// Which inserted basis elements sum to `vec`.
    combo: u64,
}

/// Reduced row echelon basis of a subspace of `{0,1}^width`.
///
/// Every vector that increased the rank becomes basis element `b_k`
/// (k = insertion order). Rows are kept fully reduced, so each pivot bit is
/// set in exactly one row.
#[derive(Clone, Debug)]
pub struct Gf2Basis {
    width: usize,
    rows: Vec<Row>,
    elements: Vec<Bits>,
    max_rank: usize,
}

impl Gf2Basis {
    pub fn new(width: usize, max_rank: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
            elements: Vec::new(),
            max_rank: max_rank.min(MAX_TRACKED_RANK),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Inserts `v` and returns its coordinates over `b_0 … b_{r-1}`.
    pub fn insert(&mut self, v: &Bits) -> Result<u64> {
        assert_eq!(v.len(), self.width);
        let mut rem = v.clone();
        let mut combo = 0u64;
        for row in &self.rows {
            if rem.get(row.pivot) {
                rem.xor_assign(&row.vec);
                combo ^= row.combo;
            }
        }
        let Some(pivot) = rem.first_one() else {
            return Ok(combo);
        };
        let k = self.rows.len();
        if k + 1 > self.max_rank {
            return Err(Error::RankExceeded {
                rank: k + 1,
                r_max: self.max_rank,
            });
        }
        // rem = b_k + (rows already subtracted), so its combo gains bit k
        let new_combo = combo ^ (1u64 << k);
        for row in &mut self.rows {
            if row.vec.get(pivot) {
                row.vec.xor_assign(&rem);
                row.combo ^= new_combo;
            }
        }
        self.elements.push(v.clone());
        self.rows.push(Row {
            vec: rem,
            pivot,
            combo: new_combo,
        });
        Ok(1u64 << k)
    }

    /// Samples `d` uniformly from `{d : d·b_k = parity_k for all k}`.
    pub fn sample_solution<R: Rng + ?Sized>(&self, parities: u64, rng: &mut R) -> Bits {
        let mut d = Bits::random(self.width, rng);
        for row in &self.rows {
            let target = (row.combo & parities).count_ones() % 2 == 1;
            if d.dot(&row.vec) != target {
                d.flip(row.pivot);
            }
        }
        d
    }

    /// Parity vector `(d·b_k)_k` of an arbitrary `d`.
    pub fn parities_of(&self, d: &Bits) -> u64 {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| d.dot(e))
            .fold(0u64, |acc, (k, _)| acc | (1u64 << k))
    }
}
