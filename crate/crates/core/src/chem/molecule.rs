use super::canon;
use super::element::Element;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Small stable integer, used in hashes and canonical keys.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    /// Contribution to an atom's valence; aromatic bonds count as one here,
    /// the extra half is handled per atom.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Total attached hydrogens (implicit plus bracket-specified).
    pub hydrogens: u8,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            aromatic: false,
            hydrogens: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoleculeError {
    #[error("bond {0}-{1} references a missing atom")]
    MissingAtom(usize, usize),
    #[error("bond from atom {0} to itself")]
    SelfBond(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
}

/// Hydrogens an unbracketed organic-subset atom carries given its bonds.
///
/// Aromatic atoms reserve one valence unit for the delocalized system and
/// use their lowest standard valence only.
pub fn implicit_hydrogens(
    element: Element,
    aromatic: bool,
    orders: impl IntoIterator<Item = BondOrder>,
) -> u8 {
    if !element.is_organic_subset() {
        return 0;
    }
    let sum: u32 = orders.into_iter().map(|o| o.valence() as u32).sum();
    let valences = element.default_valences();
    if aromatic {
        let need = sum + 1;
        match valences.first() {
            Some(&v) if v as u32 >= need => (v as u32 - need) as u8,
            _ => 0,
        }
    } else {
        valences
            .iter()
            .map(|&v| v as u32)
            .find(|&v| v >= sum)
            .map_or(0, |v| (v - sum) as u8)
    }
}

pub(crate) struct Canonical {
    pub smiles: String,
    pub ranks: Vec<u32>,
}

/// Attributed molecular graph.
///
/// Equality, ordering and hashing go through the canonical SMILES, so two
/// values compare equal exactly when their graphs are isomorphic.
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    neighbors: Vec<Vec<(usize, BondOrder)>>,
    canonical: OnceLock<Canonical>,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, MoleculeError> {
        let mut neighbors = vec![Vec::new(); atoms.len()];
        for b in &bonds {
            if b.begin >= atoms.len() || b.end >= atoms.len() {
                return Err(MoleculeError::MissingAtom(b.begin, b.end));
            }
            if b.begin == b.end {
                return Err(MoleculeError::SelfBond(b.begin));
            }
            if neighbors[b.begin].iter().any(|&(n, _)| n == b.end) {
                return Err(MoleculeError::DuplicateBond(b.begin, b.end));
            }
            neighbors[b.begin].push((b.end, b.order));
            neighbors[b.end].push((b.begin, b.order));
        }
        Ok(Molecule {
            atoms,
            bonds,
            neighbors,
            canonical: OnceLock::new(),
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element != Element::H).count()
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, BondOrder)] {
        &self.neighbors[atom]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<BondOrder> {
        self.neighbors[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, o)| o)
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.neighbors[atom].len()
    }

    /// Hydrogens this atom would receive if written without brackets.
    pub fn implicit_hydrogens(&self, atom: usize) -> u8 {
        let a = &self.atoms[atom];
        implicit_hydrogens(
            a.element,
            a.aromatic,
            self.neighbors[atom].iter().map(|&(_, o)| o),
        )
    }

    pub fn canonical_smiles(&self) -> &str {
        &self.canonical().smiles
    }

    /// Canonical rank of every atom; rank 0 is written first.
    pub fn canonical_ranks(&self) -> &[u32] {
        &self.canonical().ranks
    }

    fn canonical(&self) -> &Canonical {
        self.canonical.get_or_init(|| canon::canonicalize(self))
    }

    /// Same graph with atoms reordered: atom `i` of the result is atom
    /// `order[i]` of `self`. `order` must be a permutation.
    pub fn reordered(&self, order: &[usize]) -> Molecule {
        assert_eq!(order.len(), self.atoms.len(), "order must be a permutation");
        let mut position = vec![usize::MAX; order.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let atoms = order.iter().map(|&old| self.atoms[old]).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                begin: position[b.begin],
                end: position[b.end],
                order: b.order,
            })
            .collect();
        Molecule::new(atoms, bonds).expect("permutation preserves validity")
    }

    /// Connected components, each as its own molecule, ordered by their
    /// lowest atom index.
    pub fn components(&self) -> Vec<Molecule> {
        self.component_atoms()
            .into_iter()
            .map(|atoms| self.induced(&atoms))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.component_atoms().len() <= 1
    }

    /// Atom index lists of the connected components.
    pub fn component_atoms(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for &(n, _) in &self.neighbors[v] {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Induced subgraph on `atoms`, keeping their relative order.
    pub fn induced(&self, atoms: &[usize]) -> Molecule {
        let mut position = vec![usize::MAX; self.atoms.len()];
        for (i, &a) in atoms.iter().enumerate() {
            position[a] = i;
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| position[b.begin] != usize::MAX && position[b.end] != usize::MAX)
            .map(|b| Bond {
                begin: position[b.begin],
                end: position[b.end],
                order: b.order,
            })
            .collect();
        Molecule::new(atoms.iter().map(|&a| self.atoms[a]).collect(), bonds)
            .expect("induced subgraph of a valid molecule")
    }
}

impl Clone for Molecule {
    fn clone(&self) -> Self {
        let canonical = OnceLock::new();
        if let Some(c) = self.canonical.get() {
            let _ = canonical.set(Canonical {
                smiles: c.smiles.clone(),
                ranks: c.ranks.clone(),
            });
        }
        Molecule {
            atoms: self.atoms.clone(),
            bonds: self.bonds.clone(),
            neighbors: self.neighbors.clone(),
            canonical,
        }
    }
}

impl fmt::Debug for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Molecule({})", self.canonical_smiles())
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_smiles())
    }
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_smiles() == other.canonical_smiles()
    }
}

impl Eq for Molecule {}

impl Hash for Molecule {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_smiles().hash(state)
    }
}

impl PartialOrd for Molecule {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Molecule {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_smiles().cmp(other.canonical_smiles())
    }
}

impl Serialize for Molecule {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.canonical_smiles())
    }
}

impl<'de> Deserialize<'de> for Molecule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        super::smiles::parse_smiles(&text).map_err(serde::de::Error::custom)
    }
}
