//! Canonical SMILES and fingerprints against brute-force oracles.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roundtrip::chem::{fingerprint, fingerprint_with, parse_smiles, tanimoto, FingerprintParams};
use roundtrip::corpus::closed_world;
use roundtrip::ExactRatio;

#[test]
fn small_molecules_canonicalize_identically_under_every_atom_order() {
    let mut checked = 0;
    for s in ASSORTED.iter().filter(|s| mol(s).atom_count() <= 8) {
        let m = mol(s);
        let want = m.canonical_smiles().to_string();
        for order in permutations(m.atom_count()) {
            assert_eq!(m.reordered(&order).canonical_smiles(), want, "{s} {order:?}");
        }
        checked += 1;
    }
    assert!(checked >= 25);
}

#[test]
fn shuffles_of_larger_molecules_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let corpus = closed_world(200, 6, 4);
    let mut ms: Vec<_> = corpus.reactions.iter().map(|r| r.product.clone()).collect();
    ms.extend(ASSORTED.iter().map(|s| mol(s)));
    for m in &ms {
        for _ in 0..50 {
            assert_eq!(shuffled(m, &mut rng).canonical_smiles(), m.canonical_smiles());
        }
    }
}

#[test]
fn canonical_output_is_a_fixed_point() {
    for s in ASSORTED {
        let once = mol(s).canonical_smiles().to_string();
        assert_eq!(mol(&once).canonical_smiles(), once, "{s}");
    }
}

#[test]
fn butane_bits_match_the_multiset_oracle() {
    let m = mol("CCCC");
    let bits: std::collections::BTreeSet<usize> = fingerprint(&m, 1, 2048).ones().collect();
    assert_eq!(bits, oracle_bits(&m, 1, 2048));
}

#[test]
fn assorted_bits_match_the_multiset_oracle() {
    for s in ASSORTED {
        let m = mol(s);
        for radius in 0..=3 {
            let bits: std::collections::BTreeSet<usize> = fingerprint(&m, radius, 1024).ones().collect();
            assert_eq!(bits, oracle_bits(&m, radius, 1024), "{s} r={radius}");
        }
    }
}

#[test]
fn ethanol_vs_ethyl_acetate() {
    let (a, b) = (mol("CCO"), mol("CCOC(C)=O"));
    let params = FingerprintParams::default();
    let got: ExactRatio = tanimoto(&fingerprint_with(&a, params), &fingerprint_with(&b, params));
    let (x, y) = (oracle_bits(&a, 2, 2048), oracle_bits(&b, 2, 2048));
    let (shared, union) = jaccard(&x, &y);
    assert_eq!(got, ExactRatio::new(shared as i64, union as i64));
    // with no hashing at all: the same ratio of circular environments
    let (shared, union) = jaccard(&environments(&a, 2), &environments(&b, 2));
    assert_eq!(got, ExactRatio::new(shared as i64, union as i64));
    assert!(got > ExactRatio::new(0, 1) && got < ExactRatio::new(1, 1));
}

#[test]
fn wide_fingerprints_count_distinct_environments() {
    for s in ASSORTED {
        let m = mol(s);
        assert_eq!(
            fingerprint(&m, 2, 1 << 20).count_ones() as usize,
            environments(&m, 2).len(),
            "{s}"
        );
    }
}

proptest! {
    #[test]
    fn tanimoto_is_invariant_under_atom_order(i in 0..ASSORTED.len(), j in 0..ASSORTED.len(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (mol(ASSORTED[i]), mol(ASSORTED[j]));
        let p = FingerprintParams::default();
        let direct: f64 = tanimoto(&fingerprint_with(&a, p), &fingerprint_with(&b, p));
        let moved: f64 = tanimoto(
            &fingerprint_with(&shuffled(&a, &mut rng), p),
            &fingerprint_with(&shuffled(&b, &mut rng), p),
        );
        prop_assert_eq!(direct, moved);
        prop_assert!((0.0..=1.0).contains(&direct));
        prop_assert_eq!(direct == 1.0, fingerprint_with(&a, p) == fingerprint_with(&b, p));
    }

    #[test]
    fn reparsing_canonical_text_gives_the_same_graph_class(i in 0..ASSORTED.len(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = shuffled(&mol(ASSORTED[i]), &mut rng);
        let back = parse_smiles(m.canonical_smiles()).unwrap();
        prop_assert_eq!(back.atom_count(), m.atom_count());
        prop_assert_eq!(back.bonds().len(), m.bonds().len());
        prop_assert_eq!(back.canonical_smiles(), m.canonical_smiles());
    }
}
