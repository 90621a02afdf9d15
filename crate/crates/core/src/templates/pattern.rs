//! Attributed subgraph patterns and their bracket-SMILES text form.
//!
//! Every pattern atom is written in brackets. An explicit `H<n>` pins the
//! hydrogen count (`H0` included); no `H` leaves it open. `:<n>` is the
//! correspondence label linking an atom to its counterpart on the other side
//! of a template.

use crate::chem::smiles::{parse_pattern, ParseError};
use crate::chem::writer::{charge_text, element_text, write_graph};
use crate::chem::{Atom, Molecule};

#[derive(Debug, Clone)]
pub struct Pattern {
    pub graph: Molecule,
    pub hydrogens: Vec<Option<u8>>,
    /// Correspondence label per atom; 0 when the atom has no counterpart.
    pub labels: Vec<u32>,
}

impl Pattern {
    pub fn atom_count(&self) -> usize {
        self.graph.atom_count()
    }

    /// Whether host atom `h` of `host` satisfies pattern atom `p`.
    pub fn atom_matches(&self, p: usize, host: &Molecule, h: usize) -> bool {
        let a = &self.graph.atoms()[p];
        let b = &host.atoms()[h];
        a.element == b.element
            && a.aromatic == b.aromatic
            && a.charge == b.charge
            && self.hydrogens[p].is_none_or(|n| n == b.hydrogens)
    }

    pub(crate) fn write(&self, ranks: &[u32]) -> String {
        let text = write_graph(&self.graph, ranks, &|i, out: &mut String| {
            atom_text(&self.graph.atoms()[i], self.hydrogens[i], self.labels[i], out)
        });
        if self.graph.is_connected() {
            text
        } else {
            format!("({text})")
        }
    }

    pub(crate) fn parse(text: &str) -> Result<Pattern, ParseError> {
        let inner = text
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(text);
        let p = parse_pattern(inner)?;
        Ok(Pattern {
            graph: p.molecule,
            hydrogens: p.hydrogens,
            labels: p.labels,
        })
    }
}

fn atom_text(atom: &Atom, hydrogens: Option<u8>, label: u32, out: &mut String) {
    out.push('[');
    out.push_str(&element_text(atom));
    if let Some(h) = hydrogens {
        out.push_str(&format!("H{h}"));
    }
    charge_text(atom.charge, out);
    if label != 0 {
        out.push_str(&format!(":{label}"));
    }
    out.push(']');
}

/// Splits one side of a template on top-level dots; a parenthesized group
/// stays together as one (disconnected) pattern.
pub(crate) fn split_side(side: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in side.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            '.' if depth == 0 => {
                parts.push(&side[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&side[start..]);
    parts
}
