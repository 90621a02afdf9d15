//! Cheminformatics kernel: SMILES in and out, canonical forms, fingerprints.

pub(crate) mod canon;
pub mod element;
pub mod fingerprint;
pub mod molecule;
pub mod smiles;
pub(crate) mod writer;

pub use element::Element;
pub use fingerprint::{fingerprint, fingerprint_with, tanimoto, BitFingerprint, FingerprintParams};
pub use molecule::{implicit_hydrogens, Atom, Bond, BondOrder, Molecule, MoleculeError};
pub use smiles::{parse_components, parse_mapped, parse_smiles, MappedMolecule, ParseError, ParseErrorKind};

/// Canonical SMILES of `m`.
pub fn canonical_smiles(m: &Molecule) -> String {
    m.canonical_smiles().to_string()
}

/// Writes `m` with atom-class numbers from `maps` (0 = none).
pub fn write_mapped(m: &Molecule, maps: &[u32]) -> String {
    writer::write_molecule(m, m.canonical_ranks(), Some(maps))
}
