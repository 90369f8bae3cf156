//! `alt_vk(θ, cert)` against the original `(x, θ)`.

#![allow(dead_code)]

use crskl::games::trial_rng;
use crskl::skecd::{self, DeletionCertificate, SkecdParams};
use crskl::Bits;
use rand::Rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AltReport {
    pub certs: usize,
    /// Random certificates the original key accepts.
    pub accepted: usize,
    pub disagreements: usize,
}

/// For each of `keys` ciphertexts, builds `alt_vk` from an honest
/// certificate and compares both keys on `certs` random certificates:
/// fresh honest deletions, bit-flipped copies and uniform strings.
pub fn agreement(params: SkecdParams, keys: usize, certs: usize, seed: u64) -> AltReport {
    let mut rep = AltReport::default();
    for k in 0..keys {
        let mut rng = trial_rng(seed, k as u64);
        let sk = skecd::kg(params, &mut rng).unwrap();
        let m = Bits::random(params.msg_bits, &mut rng);
        let (ct, vk) = sk.enc(&m, &mut rng).unwrap();
        let honest = skecd::del(ct.clone(), &mut rng).unwrap();
        assert!(skecd::vrfy(&vk, &honest), "honest certificate rejected");
        let alt = skecd::alt_vk(&vk.theta, &honest);
        let len = honest.0.len();
        for _ in 0..certs {
            let cert = match rng.gen_range(0..3) {
                0 => skecd::del(ct.clone(), &mut rng).unwrap(),
                1 => {
                    let mut c = honest.clone();
                    for i in 0..params.n {
                        if rng.gen_bool(0.15) {
                            c.0.flip(i);
                        }
                    }
                    c
                }
                _ => DeletionCertificate(Bits::random(len, &mut rng)),
            };
            let a = skecd::vrfy(&vk, &cert);
            rep.certs += 1;
            rep.accepted += a as usize;
            rep.disagreements += (a != skecd::vrfy(&alt, &cert)) as usize;
        }
    }
    rep
}
