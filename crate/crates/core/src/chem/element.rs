use serde::{Deserialize, Serialize};
use std::fmt;

/// Chemical element, stored as its atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element(u8);

// (atomic number, symbol, default valences)
const TABLE: &[(u8, &str, &[u8])] = &[
    (1, "H", &[1]),
    (2, "He", &[]),
    (3, "Li", &[1]),
    (4, "Be", &[2]),
    (5, "B", &[3]),
    (6, "C", &[4]),
    (7, "N", &[3]),
    (8, "O", &[2]),
    (9, "F", &[1]),
    (10, "Ne", &[]),
    (11, "Na", &[1]),
    (12, "Mg", &[2]),
    (13, "Al", &[3]),
    (14, "Si", &[4]),
    (15, "P", &[3, 5]),
    (16, "S", &[2, 4, 6]),
    (17, "Cl", &[1]),
    (18, "Ar", &[]),
    (19, "K", &[1]),
    (20, "Ca", &[2]),
    (22, "Ti", &[]),
    (24, "Cr", &[]),
    (25, "Mn", &[]),
    (26, "Fe", &[]),
    (27, "Co", &[]),
    (28, "Ni", &[]),
    (29, "Cu", &[]),
    (30, "Zn", &[]),
    (33, "As", &[3, 5]),
    (34, "Se", &[2, 4, 6]),
    (35, "Br", &[1]),
    (37, "Rb", &[1]),
    (38, "Sr", &[2]),
    (45, "Rh", &[]),
    (46, "Pd", &[]),
    (47, "Ag", &[]),
    (50, "Sn", &[]),
    (51, "Sb", &[]),
    (52, "Te", &[2, 4, 6]),
    (53, "I", &[1]),
    (55, "Cs", &[1]),
    (56, "Ba", &[2]),
    (78, "Pt", &[]),
    (79, "Au", &[]),
    (80, "Hg", &[]),
];

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        TABLE.iter().find(|e| e.0 == z).map(|e| Element(e.0))
    }

    /// Looks up a symbol with its canonical capitalization ("Cl", not "CL").
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE.iter().find(|e| e.1 == symbol).map(|e| Element(e.0))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        self.entry().1
    }

    /// Standard valences used for implicit hydrogen assignment, smallest first.
    pub fn default_valences(self) -> &'static [u8] {
        self.entry().2
    }

    /// Members of the SMILES organic subset may be written without brackets.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may appear as lowercase aromatic atoms.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }

    fn entry(self) -> &'static (u8, &'static str, &'static [u8]) {
        TABLE
            .iter()
            .find(|e| e.0 == self.0)
            .expect("Element constructed from table")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
