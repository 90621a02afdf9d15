//! Circular (ECFP-style) bit fingerprints and Tanimoto similarity.
//!
//! Atom identifiers are FNV-1a 64-bit hashes over little-endian encodings,
//! so fingerprints are identical across runs, platforms and builds.
//!
//! * radius 0: hash of (atomic number, heavy degree, hydrogens, charge, aromatic)
//! * radius r: hash of (r, previous identifier, sorted (bond code, neighbor identifier) pairs)
//!
//! Every identifier at every radius sets bit `id % width`.

use super::element::Element;
use super::molecule::Molecule;
use crate::num::Scalar;
use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use std::hash::Hasher;

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_WIDTH: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintParams {
    pub radius: u32,
    pub width: usize,
}

impl Default for FingerprintParams {
    fn default() -> Self {
        FingerprintParams {
            radius: DEFAULT_RADIUS,
            width: DEFAULT_WIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitFingerprint {
    words: Vec<u64>,
    width: usize,
    radius: u32,
}

impl BitFingerprint {
    pub fn empty(width: usize, radius: u32) -> BitFingerprint {
        assert!(width.is_power_of_two(), "fingerprint width must be a power of two");
        BitFingerprint {
            words: vec![0; width.div_ceil(64)],
            width,
            radius,
        }
    }

    pub fn from_bits(width: usize, bits: impl IntoIterator<Item = usize>) -> BitFingerprint {
        let mut fp = BitFingerprint::empty(width, 0);
        for b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }
}

pub(crate) fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Radius-0 identifier of every atom.
pub fn atom_invariants(m: &Molecule) -> Vec<u64> {
    (0..m.atom_count())
        .map(|i| {
            let a = &m.atoms()[i];
            let heavy_degree = m
                .neighbors(i)
                .iter()
                .filter(|&&(n, _)| m.atoms()[n].element != Element::H)
                .count() as u32;
            let mut buf = Vec::with_capacity(12);
            buf.extend_from_slice(&(a.element.atomic_number() as u32).to_le_bytes());
            buf.extend_from_slice(&heavy_degree.to_le_bytes());
            buf.push(a.hydrogens);
            buf.push(a.charge as u8);
            buf.push(a.aromatic as u8);
            fnv64(&buf)
        })
        .collect()
}

pub fn fingerprint(m: &Molecule, radius: u32, width: usize) -> BitFingerprint {
    let mut fp = BitFingerprint::empty(width, radius);
    let mut ids = atom_invariants(m);
    for &id in &ids {
        fp.set((id % width as u64) as usize);
    }
    let mut pairs: Vec<(u8, u64)> = Vec::new();
    for r in 1..=radius {
        let next: Vec<u64> = (0..m.atom_count())
            .map(|i| {
                pairs.clear();
                pairs.extend(m.neighbors(i).iter().map(|&(n, o)| (o.code(), ids[n])));
                pairs.sort_unstable();
                let mut buf = Vec::with_capacity(12 + pairs.len() * 9);
                buf.extend_from_slice(&r.to_le_bytes());
                buf.extend_from_slice(&ids[i].to_le_bytes());
                for &(code, id) in &pairs {
                    buf.push(code);
                    buf.extend_from_slice(&id.to_le_bytes());
                }
                fnv64(&buf)
            })
            .collect();
        for &id in &next {
            fp.set((id % width as u64) as usize);
        }
        ids = next;
    }
    fp
}

pub fn fingerprint_with(m: &Molecule, params: FingerprintParams) -> BitFingerprint {
    fingerprint(m, params.radius, params.width)
}

/// |a ∧ b| / |a ∨ b|; two empty fingerprints are identical, so 1.
///
/// Panics if the widths differ.
pub fn tanimoto<S: Scalar>(a: &BitFingerprint, b: &BitFingerprint) -> S {
    assert_eq!(a.width, b.width, "tanimoto of fingerprints with different widths");
    let (mut both, mut either) = (0u64, 0u64);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones() as u64;
        either += (x | y).count_ones() as u64;
    }
    if either == 0 {
        S::one()
    } else {
        S::ratio(both, either)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use num_rational::Ratio;
    use proptest::prelude::*;

    #[test]
    fn methane_radius_zero_has_one_bit() {
        let fp = fingerprint(&parse_smiles("C").unwrap(), 0, 2048);
        assert_eq!(fp.count_ones(), 1);
    }

    #[test]
    fn deterministic() {
        let m = parse_smiles("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        assert_eq!(fingerprint(&m, 2, 2048), fingerprint(&m, 2, 2048));
    }

    #[test]
    fn fnv_reference_vectors() {
        // published FNV-1a 64 test vectors
        assert_eq!(fnv64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn tanimoto_examples() {
        let a = BitFingerprint::from_bits(64, [1, 2, 3]);
        let b = BitFingerprint::from_bits(64, [2, 3, 4]);
        let c = BitFingerprint::from_bits(64, [10, 11]);
        assert_eq!(tanimoto::<f64>(&a, &b), 0.5);
        assert_eq!(tanimoto::<Ratio<i64>>(&a, &b), Ratio::new(1, 2));
        assert_eq!(tanimoto::<f64>(&a, &a), 1.0);
        assert_eq!(tanimoto::<f64>(&a, &c), 0.0);
        let empty = BitFingerprint::empty(64, 0);
        assert_eq!(tanimoto::<f32>(&empty, &empty), 1.0);
    }

    #[test]
    #[should_panic]
    fn width_mismatch_panics() {
        let _: f64 = tanimoto(&BitFingerprint::empty(64, 0), &BitFingerprint::empty(128, 0));
    }

    #[test]
    fn invariant_under_atom_order() {
        let m = parse_smiles("OCC(=O)Nc1ccncc1").unwrap();
        let r = m.reordered(&(0..m.atom_count()).rev().collect::<Vec<_>>());
        assert_eq!(fingerprint(&m, 2, 2048), fingerprint(&r, 2, 2048));
    }

    proptest! {
        #[test]
        fn tanimoto_is_symmetric_and_bounded(
            a in proptest::collection::btree_set(0usize..256, 0..40),
            b in proptest::collection::btree_set(0usize..256, 0..40),
        ) {
            let fa = BitFingerprint::from_bits(256, a);
            let fb = BitFingerprint::from_bits(256, b);
            let ab: Ratio<i64> = tanimoto(&fa, &fb);
            let ba: Ratio<i64> = tanimoto(&fb, &fa);
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= Ratio::from_integer(0) && ab <= Ratio::from_integer(1));
            prop_assert_eq!(tanimoto::<Ratio<i64>>(&fa, &fa), Ratio::from_integer(1));
        }
    }
}
