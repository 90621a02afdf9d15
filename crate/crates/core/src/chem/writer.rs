//! SMILES writer driven by an atom ranking.
//!
//! Each component starts at its lowest-ranked atom; neighbors are visited in
//! rank order, the highest-ranked child continues the main chain and the
//! others become branches. Ring-closure digits are reused lowest-first.

use super::molecule::{Atom, BondOrder, Molecule};

pub(crate) fn bond_symbol(order: BondOrder, a_aromatic: bool, b_aromatic: bool) -> &'static str {
    let both = a_aromatic && b_aromatic;
    match order {
        BondOrder::Single if both => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both => "",
        BondOrder::Aromatic => ":",
    }
}

pub(crate) fn element_text(atom: &Atom) -> String {
    let s = atom.element.symbol();
    if atom.aromatic {
        s.to_ascii_lowercase()
    } else {
        s.to_string()
    }
}

pub(crate) fn charge_text(charge: i8, out: &mut String) {
    match charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => out.push_str(&format!("+{c}")),
        c => out.push_str(&format!("-{}", -c)),
    }
}

/// Writes `m` with atoms ordered by `ranks`. When `maps` is given, atoms
/// with a nonzero entry are bracketed and carry that atom-class number.
pub(crate) fn write_molecule(m: &Molecule, ranks: &[u32], maps: Option<&[u32]>) -> String {
    let atom_text = |i: usize, out: &mut String| {
        let atom = &m.atoms()[i];
        let map = maps.map_or(0, |mp| mp[i]);
        let plain = map == 0
            && atom.charge == 0
            && atom.element.is_organic_subset()
            && (!atom.aromatic || atom.element.can_be_aromatic())
            && m.implicit_hydrogens(i) == atom.hydrogens;
        if plain {
            out.push_str(&element_text(atom));
            return;
        }
        out.push('[');
        out.push_str(&element_text(atom));
        match atom.hydrogens {
            0 => {}
            1 => out.push('H'),
            h => out.push_str(&format!("H{h}")),
        }
        charge_text(atom.charge, out);
        if map != 0 {
            out.push_str(&format!(":{map}"));
        }
        out.push(']');
    };
    write_graph(m, ranks, &atom_text)
}

/// Generic DFS writer; `atom_text` renders a single atom.
pub(crate) fn write_graph(
    m: &Molecule,
    ranks: &[u32],
    atom_text: &dyn Fn(usize, &mut String),
) -> String {
    let n = m.atom_count();
    let mut w = Walk {
        m,
        ranks,
        visit: vec![usize::MAX; n],
        parent: vec![usize::MAX; n],
        children: vec![Vec::new(); n],
        rings: vec![Vec::new(); n],
        counter: 0,
    };
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&i| ranks[i]);

    let mut out = String::new();
    let mut digits: Vec<Option<usize>> = Vec::new();
    let mut ring_digit: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    for &s in &starts {
        if w.visit[s] != usize::MAX {
            continue;
        }
        w.discover(s, usize::MAX);
        if !out.is_empty() {
            out.push('.');
        }
        emit(&w, s, None, atom_text, &mut out, &mut digits, &mut ring_digit);
    }
    out
}

struct Walk<'a> {
    m: &'a Molecule,
    ranks: &'a [u32],
    visit: Vec<usize>,
    parent: Vec<usize>,
    children: Vec<Vec<(usize, BondOrder)>>,
    // ring partners with the bond order, in discovery order
    rings: Vec<Vec<(usize, BondOrder)>>,
    counter: usize,
}

impl Walk<'_> {
    fn sorted_neighbors(&self, v: usize) -> Vec<(usize, BondOrder)> {
        let mut nbrs = self.m.neighbors(v).to_vec();
        nbrs.sort_by_key(|&(u, _)| self.ranks[u]);
        nbrs
    }

    fn discover(&mut self, v: usize, parent: usize) {
        self.visit[v] = self.counter;
        self.counter += 1;
        self.parent[v] = parent;
        for (u, order) in self.sorted_neighbors(v) {
            if u == parent {
                continue;
            }
            if self.visit[u] == usize::MAX {
                self.children[v].push((u, order));
                self.discover(u, v);
            } else if self.visit[u] < self.visit[v] {
                // back edge to an ancestor: ring opens at u, closes at v
                self.rings[u].push((v, order));
                self.rings[v].push((u, order));
            }
        }
    }
}

fn emit(
    w: &Walk,
    v: usize,
    incoming: Option<BondOrder>,
    atom_text: &dyn Fn(usize, &mut String),
    out: &mut String,
    digits: &mut Vec<Option<usize>>,
    ring_digit: &mut std::collections::HashMap<(usize, usize), usize>,
) {
    let aromatic = |i: usize| w.m.atoms()[i].aromatic;
    if let Some(order) = incoming {
        out.push_str(bond_symbol(order, aromatic(w.parent[v]), aromatic(v)));
    }
    atom_text(v, out);

    let mut partners = w.rings[v].clone();
    partners.sort_by_key(|&(u, _)| w.visit[u]);
    let mut freed = Vec::new();
    for (u, order) in partners {
        let key = (u.min(v), u.max(v));
        if let Some(d) = ring_digit.remove(&key) {
            write_digit(d, out);
            freed.push(d);
        } else {
            let d = match digits.iter().position(Option::is_none) {
                Some(free) => free,
                None => {
                    digits.push(None);
                    digits.len() - 1
                }
            };
            digits[d] = Some(v);
            ring_digit.insert(key, d);
            out.push_str(bond_symbol(order, aromatic(u), aromatic(v)));
            write_digit(d, out);
        }
    }
    for d in freed {
        digits[d] = None;
    }

    let kids = &w.children[v];
    for (i, &(child, order)) in kids.iter().enumerate() {
        let last = i + 1 == kids.len();
        if !last {
            out.push('(');
        }
        emit(w, child, Some(order), atom_text, out, digits, ring_digit);
        if !last {
            out.push(')');
        }
    }
}

fn write_digit(d: usize, out: &mut String) {
    let n = d + 1;
    if n < 10 {
        out.push(char::from(b'0' + n as u8));
    } else {
        out.push_str(&format!("%{n:02}"));
    }
}

#[cfg(test)]
mod tests {
    use crate::chem::parse_smiles;

    #[test]
    fn known_outputs_round_trip() {
        for s in [
            "CCO",
            "c1ccccc1",
            "C1CCCCC1",
            "CC(=O)[O-].[Na+]",
            "c1ccccc1-c1ccccc1",
            "C#N",
            "c1cc[nH]c1",
            "[2H]C",
            "C[N+](C)(C)C",
            "C1CC2CC3CC4CC5CC6CC7CC8CC9CC%10CC1CC2CC3CC4CC5CC6CC7CC8CC9C%10",
        ] {
            let m = parse_smiles(s).unwrap();
            let text = m.canonical_smiles().to_string();
            let again = parse_smiles(&text).unwrap_or_else(|e| panic!("{s} -> {text}: {e}"));
            assert_eq!(again.atoms().len(), m.atoms().len());
            assert_eq!(again.bonds().len(), m.bonds().len());
            assert_eq!(again.canonical_smiles(), text, "{s}");
        }
    }

    #[test]
    fn simple_forms() {
        assert_eq!(parse_smiles("OCC").unwrap().canonical_smiles(), "CCO");
        let benzene = parse_smiles("C1=CC=CC=C1").unwrap();
        // kekule input stays kekule: no aromaticity perception
        assert!(benzene.canonical_smiles().contains('='));
    }
}
