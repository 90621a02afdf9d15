//! Graph rewriting: replace a matched left-hand side with the right-hand side.
//!
//! Labeled atoms survive and take the attributes of their right-hand
//! counterpart; unlabeled left atoms are deleted and unlabeled right atoms
//! are created. Pattern bonds on the left are removed and pattern bonds on the
//! right are added, so bonds the patterns do not mention are carried over.

use super::pattern::Pattern;
use crate::chem::{parse_smiles, Atom, Bond, BondOrder, Molecule};
use std::collections::{BTreeMap, HashMap};

/// Rewrites `hosts` at `embedding` (one image vector per left pattern, left
/// pattern `i` embedded in `hosts[i]`). Returns one molecule per right
/// pattern, or `None` when the result is not a well-formed set of molecules.
///
/// With `drop_spectators`, components touching no right pattern are
/// discarded; otherwise their presence invalidates the application.
pub(crate) fn rewrite(
    lhs: &[Pattern],
    rhs: &[Pattern],
    hosts: &[&Molecule],
    embedding: &[Vec<usize>],
    drop_spectators: bool,
) -> Option<Vec<Molecule>> {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: BTreeMap<(usize, usize), BondOrder> = BTreeMap::new();
    let mut offsets = Vec::with_capacity(hosts.len());
    for host in hosts {
        let off = atoms.len();
        offsets.push(off);
        atoms.extend_from_slice(host.atoms());
        for b in host.bonds() {
            bonds.insert(key(off + b.begin, off + b.end), b.order);
        }
    }

    let mut deleted = vec![false; atoms.len()];
    let mut by_label: HashMap<u32, usize> = HashMap::new();
    for (i, pat) in lhs.iter().enumerate() {
        let img = |p: usize| offsets[i] + embedding[i][p];
        for p in 0..pat.atom_count() {
            match pat.labels[p] {
                0 => deleted[img(p)] = true,
                l => {
                    by_label.insert(l, img(p));
                }
            }
        }
        for b in pat.graph.bonds() {
            bonds.remove(&key(img(b.begin), img(b.end)));
        }
    }

    let mut touched = Vec::new();
    let mut rhs_atoms: Vec<Vec<usize>> = Vec::with_capacity(rhs.len());
    for pat in rhs {
        let mut placed = Vec::with_capacity(pat.atom_count());
        for p in 0..pat.atom_count() {
            let src = &pat.graph.atoms()[p];
            let target = match pat.labels[p] {
                0 => {
                    atoms.push(Atom {
                        hydrogens: pat.hydrogens[p]?,
                        ..*src
                    });
                    deleted.push(false);
                    atoms.len() - 1
                }
                l => {
                    let t = *by_label.get(&l)?;
                    let a = &mut atoms[t];
                    if a.element != src.element {
                        return None;
                    }
                    a.aromatic = src.aromatic;
                    a.charge = src.charge;
                    if let Some(h) = pat.hydrogens[p] {
                        a.hydrogens = h;
                    }
                    t
                }
            };
            touched.push(target);
            placed.push(target);
        }
        for b in pat.graph.bonds() {
            let k = key(placed[b.begin], placed[b.end]);
            if bonds.insert(k, b.order).is_some() {
                return None;
            }
        }
        rhs_atoms.push(placed);
    }

    // compact away deleted atoms
    let mut new_index = vec![usize::MAX; atoms.len()];
    let mut kept = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        if !deleted[i] {
            new_index[i] = kept.len();
            kept.push(*a);
        }
    }
    let mut kept_bonds = Vec::with_capacity(bonds.len());
    for (&(a, b), &order) in &bonds {
        if deleted[a] || deleted[b] {
            continue;
        }
        kept_bonds.push(Bond {
            begin: new_index[a],
            end: new_index[b],
            order,
        });
    }
    let merged = Molecule::new(kept, kept_bonds).ok()?;
    for &t in &touched {
        if deleted[t] || !valence_ok(&merged, new_index[t]) {
            return None;
        }
    }

    let components = merged.component_atoms();
    let mut component_of = vec![usize::MAX; merged.atom_count()];
    for (c, members) in components.iter().enumerate() {
        for &a in members {
            component_of[a] = c;
        }
    }
    let mut claimed = vec![false; components.len()];
    let mut out = Vec::with_capacity(rhs.len());
    for placed in &rhs_atoms {
        let c = component_of[new_index[placed[0]]];
        if placed.iter().any(|&t| component_of[new_index[t]] != c) || claimed[c] {
            return None;
        }
        claimed[c] = true;
        out.push(merged.induced(&components[c]));
    }
    if !drop_spectators && claimed.iter().any(|&c| !c) {
        return None;
    }
    for m in &out {
        // every emitted molecule must survive a trip through its own text
        match parse_smiles(m.canonical_smiles()) {
            Ok(again) if again.canonical_smiles() == m.canonical_smiles() => {}
            _ => return None,
        }
    }
    Some(out)
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Rejects non-aromatic atoms whose bonds and hydrogens exceed the largest
/// standard valence, widened by the magnitude of the formal charge.
fn valence_ok(m: &Molecule, atom: usize) -> bool {
    let a = &m.atoms()[atom];
    if a.aromatic {
        return true;
    }
    let Some(&max) = a.element.default_valences().iter().max() else {
        return true;
    };
    let used: u32 = m
        .neighbors(atom)
        .iter()
        .map(|&(_, o)| o.valence() as u32)
        .sum::<u32>()
        + a.hydrogens as u32;
    used <= max as u32 + a.charge.unsigned_abs() as u32
}
