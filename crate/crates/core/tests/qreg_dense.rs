mod common;

use common::dense::Dense;
use common::fidelity::run_sequence;
use crskl::qreg::{RegisterLayout, SparseState};
use crskl::Bits;
use num_complex::Complex64;
use proptest::prelude::*;

fn state_from(widths: &[usize], terms: &[(u64, f64, f64)]) -> SparseState {
    let names: Vec<String> = (0..widths.len()).map(|i| format!("s{i}")).collect();
    let layout = RegisterLayout::new(names.iter().map(String::as_str).zip(widths.iter().copied())).unwrap();
    let bits: usize = widths.iter().sum();
    SparseState::from_terms(
        layout,
        terms
            .iter()
            .map(|&(v, re, im)| (Bits::from_u64(v & ((1 << bits) - 1), bits), Complex64::new(re, im))),
    )
    .unwrap()
}

fn arb_state() -> impl Strategy<Value = SparseState> {
    (prop::collection::vec(1usize..=3, 2..=4), prop::collection::vec((any::<u64>(), -1.0..1.0f64, -1.0..1.0f64), 1..8))
        .prop_filter("nonzero", |(_, t)| t.iter().any(|(_, a, b)| a.abs() + b.abs() > 0.1))
        .prop_filter_map("amplitudes cancel", |(w, t)| {
            let names: Vec<String> = (0..w.len()).map(|i| format!("s{i}")).collect();
            let layout = RegisterLayout::new(names.iter().map(String::as_str).zip(w.iter().copied())).ok()?;
            let bits: usize = w.iter().sum();
            SparseState::from_terms(
                layout,
                t.iter()
                    .map(|&(v, re, im)| (Bits::from_u64(v & ((1 << bits) - 1), bits), Complex64::new(re, im))),
            )
            .ok()
        })
}

#[test]
fn bb84_matches_hadamard_on_basis_state() {
    let x = Bits::parse("1011").unwrap();
    let theta = Bits::parse("0110").unwrap();
    let s = SparseState::prepare_bb84(&x, &theta).unwrap();
    let mut d = Dense::from_sparse(&SparseState::basis_state(s.layout().clone(), &x).unwrap());
    d.hadamard(&["Q_2", "Q_3"]);
    assert!((d.overlap(&Dense::from_sparse(&s)) - 1.0).abs() < 1e-12);
    // phase matters, not only magnitude
    let flipped = SparseState::prepare_bb84(&Bits::parse("1111").unwrap(), &theta).unwrap();
    assert!(d.overlap(&Dense::from_sparse(&flipped)) < 1e-9);
}

#[test]
fn dense_oracle_agrees_with_reference_layout() {
    let s = state_from(&[2, 1, 3], &[(0b101100, 1.0, 0.0), (0b010011, 0.0, -1.0), (0b111111, 0.5, 0.5)]);
    let d = Dense::from_sparse(&s);
    let v = s.dense_oracle().unwrap();
    assert_eq!(v.len(), d.amps.len());
    for (a, b) in v.iter().zip(&d.amps) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn random_sequences_match_dense_reference() {
    for i in 0..30 {
        let r = run_sequence(11, i, 5000);
        assert_eq!(r.impossible, 0, "{:?}", r.ops);
        assert!(r.min_overlap > 1.0 - 1e-9, "{:?} overlap {}", r.ops, r.min_overlap);
        assert!(r.tv < 0.05, "{:?} tv {}", r.ops, r.tv);
    }
}

#[test]
fn measurement_on_twelve_bits_stays_exact() {
    let s = state_from(&[4, 4, 4], &[(0xabc, 1.0, 0.0), (0x123, 0.0, 1.0), (0xfff, -1.0, 0.0), (0x800, 0.3, 0.0)]);
    let d = Dense::from_sparse(&s);
    let exact = d.hadamard_distribution(&["s0", "s2"]);
    let sampler = s.hadamard_sampler(&["s0", "s2"]).unwrap();
    for v in 0..256u64 {
        let out = Bits::from_u64(v, 8);
        let p = exact.get(&out).copied().unwrap_or(0.0);
        assert!((sampler.probability(&out) - p).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hadamard_probabilities_match(s in arb_state(), pick in any::<u64>()) {
        let names: Vec<String> = s.layout().segments().iter().map(|g| g.name().to_string()).collect();
        let chosen: Vec<&str> = names.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).map(|(_, n)| n.as_str()).collect();
        prop_assume!(!chosen.is_empty());
        let exact = Dense::from_sparse(&s).hadamard_distribution(&chosen);
        let sampler = s.hadamard_sampler(&chosen).unwrap();
        let width = sampler.width();
        for v in 0..1u64 << width {
            let out = Bits::from_u64(v, width);
            let p = exact.get(&out).copied().unwrap_or(0.0);
            prop_assert!((sampler.probability(&out) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn computational_distribution_matches(s in arb_state(), pick in 0usize..4) {
        let names: Vec<String> = s.layout().segments().iter().map(|g| g.name().to_string()).collect();
        let name = &names[pick % names.len()];
        let exact = Dense::from_sparse(&s).distribution(&[name]);
        let got = s.computational_distribution(&[name]).unwrap();
        prop_assert_eq!(exact.len(), got.len());
        for (k, p) in &exact {
            prop_assert!((got[k] - p).abs() < 1e-9);
        }
    }

    #[test]
    fn hadamard_post_state_matches(s in arb_state(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let names: Vec<String> = s.layout().segments().iter().map(|g| g.name().to_string()).collect();
        let (o, post) = s.clone().measure_hadamard(&[&names[0]], &mut rng).unwrap();
        let mut d = Dense::from_sparse(&s);
        d.hadamard(&[&names[0]]);
        d.project(&[&names[0]], &o.bits);
        d.remove(&[&names[0]]);
        prop_assert!(d.overlap(&Dense::from_sparse(&post)) > 1.0 - 1e-9);
    }
}
