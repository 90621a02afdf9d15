//! Independent oracles shared by the integration and acceptance tests.
//!
//! Each oracle recomputes a library result the slow, obvious way, using only
//! plain strings and explicit enumeration.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use roundtrip::chem::{parse_smiles, Element, Molecule};
use roundtrip::network::{StockSet, SyntheticRoute};
use roundtrip::reaction::parse_reaction_smiles;
use std::collections::{BTreeMap, BTreeSet};

pub fn mol(s: &str) -> Molecule {
    parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

// ---------------------------------------------------------------------------
// fingerprints

/// FNV-1a, 64 bit, written out from the published constants.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Circular-fingerprint bit positions, rebuilt by constructing each atom's
/// neighbor multiset explicitly (as a count map) before hashing it.
pub fn oracle_bits(m: &Molecule, radius: u32, width: usize) -> BTreeSet<usize> {
    let n = m.atom_count();
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = m.atoms()[i];
            let heavy = m
                .neighbors(i)
                .iter()
                .filter(|(j, _)| m.atoms()[*j].element != Element::H)
                .count() as u32;
            let mut bytes = Vec::new();
            bytes.extend((a.element.atomic_number() as u32).to_le_bytes());
            bytes.extend(heavy.to_le_bytes());
            bytes.extend([a.hydrogens, a.charge as u8, a.aromatic as u8]);
            fnv1a(&bytes)
        })
        .collect();
    let mut bits: BTreeSet<usize> = ids.iter().map(|id| (id % width as u64) as usize).collect();
    for r in 1..=radius {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let mut multiset: BTreeMap<(u8, u64), usize> = BTreeMap::new();
            for &(j, order) in m.neighbors(i) {
                *multiset.entry((order.code(), ids[j])).or_default() += 1;
            }
            let mut bytes = Vec::new();
            bytes.extend(r.to_le_bytes());
            bytes.extend(ids[i].to_le_bytes());
            for ((code, id), count) in multiset {
                for _ in 0..count {
                    bytes.push(code);
                    bytes.extend(id.to_le_bytes());
                }
            }
            next.push(fnv1a(&bytes));
        }
        bits.extend(next.iter().map(|id| (id % width as u64) as usize));
        ids = next;
    }
    bits
}

/// Every distinct circular environment up to `radius`, written as a nested
/// string with no hashing at all.
pub fn environments(m: &Molecule, radius: u32) -> BTreeSet<String> {
    let n = m.atom_count();
    let mut env: Vec<String> = (0..n)
        .map(|i| {
            let a = m.atoms()[i];
            format!(
                "{}/{}/{}/{}/{}",
                a.element.atomic_number(),
                m.degree(i),
                a.hydrogens,
                a.charge,
                a.aromatic
            )
        })
        .collect();
    let mut all: BTreeSet<String> = env.iter().map(|e| format!("0:{e}")).collect();
    for r in 1..=radius {
        env = (0..n)
            .map(|i| {
                let mut around: Vec<String> = m
                    .neighbors(i)
                    .iter()
                    .map(|&(j, o)| format!("{}-{}", o.code(), env[j]))
                    .collect();
                around.sort();
                format!("({}[{}])", env[i], around.join(","))
            })
            .collect();
        all.extend(env.iter().map(|e| format!("{r}:{e}")));
    }
    all
}

/// Jaccard similarity of two sets as an exact fraction `(shared, union)`.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> (u64, u64) {
    (a.intersection(b).count() as u64, a.union(b).count() as u64)
}

// ---------------------------------------------------------------------------
// canonicalization

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

pub fn shuffled(m: &Molecule, rng: &mut impl Rng) -> Molecule {
    let mut order: Vec<usize> = (0..m.atom_count()).collect();
    order.shuffle(rng);
    m.reordered(&order)
}

/// Assorted molecules covering rings, aromatics, charges, symmetry and
/// heteroatoms.
pub const ASSORTED: &[&str] = &[
    "C", "CC", "CCO", "CC(=O)O", "CCOC(C)=O", "c1ccccc1", "Cc1ccccc1", "c1ccncc1", "C1CC1",
    "C1CCCCC1", "C1CCC2CCCCC2C1", "c1ccc2ccccc2c1", "OC(=O)c1ccccc1", "CC(C)(C)O", "C[N+](C)(C)C",
    "[O-]C(=O)C", "N#CCC#N", "C=CC=C", "OCC(O)CO", "c1ccoc1", "c1cc[nH]c1", "CS(=O)(=O)N",
    "ClC(Cl)(Cl)Cl", "BrCCBr", "C1CC2CC1C2", "C12C3C4C1C5C2C3C45", "CC(C)CC(C)C", "NC(=O)N",
    "OC1CCC(O)CC1", "c1ccc(-c2ccccc2)cc1", "O=C1CCCC1", "CCN(CC)CC", "C1COCCN1", "FC(F)F",
    "CC#CC", "OB(O)c1ccccc1", "C1=CCC=C1",
];

// ---------------------------------------------------------------------------
// route enumeration

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Treat {
    Absent,
    Leaf,
    Make(usize),
}

/// `(sorted reactant SMILES, product SMILES)` per distinct reaction line.
pub fn parse_network(lines: &[String]) -> Vec<(Vec<String>, String)> {
    let mut out: Vec<(Vec<String>, String)> = Vec::new();
    for l in lines {
        let r = parse_reaction_smiles(l, "oracle").unwrap();
        let mut rs: Vec<String> = r.reactants.iter().map(|m| m.to_string()).collect();
        rs.sort();
        rs.dedup();
        let entry = (rs, r.product.to_string());
        if !out.contains(&entry) {
            out.push(entry);
        }
    }
    out
}

/// Route identity as `(leaves, steps)`, each sorted; a step is written
/// `reactants joined by '.' >> product`.
pub type RouteKey = (Vec<String>, Vec<String>);

pub fn route_key(route: &SyntheticRoute) -> RouteKey {
    let mut leaves: Vec<String> = route.leaves.iter().map(|m| m.to_string()).collect();
    leaves.sort();
    let mut steps: Vec<String> = route
        .steps
        .iter()
        .map(|s| {
            let mut rs: Vec<String> = s.reactants.iter().map(|m| m.to_string()).collect();
            rs.sort();
            format!("{}>>{}", rs.join("."), s.product)
        })
        .collect();
    steps.sort();
    (leaves, steps)
}

/// Every route to `target`, by trying every treatment of every molecule
/// upstream of it (absent, leaf, or made by one of its reactions) and
/// keeping the combinations that form a route: the target is made; exactly
/// the molecules reachable from it are present; leaves have no producer or
/// are in stock; nothing is its own ancestor; and the longest chain of
/// reactions is at most `max_depth`.
///
/// Returns `None` when the search space exceeds `limit` combinations.
pub fn brute_force_routes(
    reactions: &[(Vec<String>, String)],
    target: &str,
    max_depth: usize,
    stock: Option<&StockSet>,
    limit: u64,
) -> Option<BTreeSet<RouteKey>> {
    // molecules upstream of the target
    let mut upstream: Vec<String> = vec![target.to_string()];
    let mut i = 0;
    while i < upstream.len() {
        let m = upstream[i].clone();
        for (rs, p) in reactions {
            if *p == m {
                for r in rs {
                    if !upstream.contains(r) {
                        upstream.push(r.clone());
                    }
                }
            }
        }
        i += 1;
    }
    let options: Vec<Vec<Treat>> = upstream
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let producers: Vec<usize> = (0..reactions.len()).filter(|&r| reactions[r].1 == *m).collect();
            let mut opts = Vec::new();
            if k > 0 {
                opts.push(Treat::Absent);
                if producers.is_empty() || stock.is_some_and(|s| s.contains_smiles(m)) {
                    opts.push(Treat::Leaf);
                }
            }
            opts.extend(producers.into_iter().map(Treat::Make));
            opts
        })
        .collect();
    let space = options.iter().try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))?;
    if space > limit {
        return None;
    }

    let index: BTreeMap<&str, usize> = upstream.iter().enumerate().map(|(k, m)| (m.as_str(), k)).collect();
    let mut found = BTreeSet::new();
    let mut choice = vec![0usize; upstream.len()];
    if options.iter().any(|o| o.is_empty()) {
        return Some(found);
    }
    'outer: loop {
        let treat: Vec<Treat> = choice.iter().zip(&options).map(|(&c, o)| o[c]).collect();
        if let Some(key) = as_route(reactions, &upstream, &index, &treat, max_depth) {
            found.insert(key);
        }
        // next combination, odometer style
        for k in 0..choice.len() {
            choice[k] += 1;
            if choice[k] < options[k].len() {
                continue 'outer;
            }
            choice[k] = 0;
        }
        break;
    }
    Some(found)
}

fn as_route(
    reactions: &[(Vec<String>, String)],
    upstream: &[String],
    index: &BTreeMap<&str, usize>,
    treat: &[Treat],
    max_depth: usize,
) -> Option<RouteKey> {
    // exactly the reachable molecules are present
    let mut reached = vec![false; upstream.len()];
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(k) = stack.pop() {
        match treat[k] {
            Treat::Absent => return None,
            Treat::Leaf => {}
            Treat::Make(r) => {
                for x in &reactions[r].0 {
                    let j = index[x.as_str()];
                    if !reached[j] {
                        reached[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
    }
    if (0..upstream.len()).any(|k| !reached[k] && treat[k] != Treat::Absent) {
        return None;
    }
    // acyclic, and the longest chain within the limit
    fn longest(
        k: usize,
        reactions: &[(Vec<String>, String)],
        index: &BTreeMap<&str, usize>,
        treat: &[Treat],
        visiting: &mut Vec<bool>,
    ) -> Option<usize> {
        let Treat::Make(r) = treat[k] else { return Some(0) };
        if visiting[k] {
            return None;
        }
        visiting[k] = true;
        let mut best = 0;
        for x in &reactions[r].0 {
            best = best.max(longest(index[x.as_str()], reactions, index, treat, visiting)?);
        }
        visiting[k] = false;
        Some(best + 1)
    }
    let depth = longest(0, reactions, index, treat, &mut vec![false; upstream.len()])?;
    if depth > max_depth {
        return None;
    }
    let mut leaves = Vec::new();
    let mut steps = Vec::new();
    for (k, t) in treat.iter().enumerate() {
        match *t {
            Treat::Leaf => leaves.push(upstream[k].clone()),
            Treat::Make(r) => steps.push(format!("{}>>{}", reactions[r].0.join("."), upstream[k])),
            Treat::Absent => {}
        }
    }
    leaves.sort();
    steps.sort();
    Some((leaves, steps))
}

/// Molecules made by at least one reaction.
pub fn products(reactions: &[(Vec<String>, String)]) -> BTreeSet<String> {
    reactions.iter().map(|(_, p)| p.clone()).collect()
}

// ---------------------------------------------------------------------------
// corruption

/// The molecule with one aliphatic carbon turned into silicon (same valence
/// and hydrogens, so the graph stays well formed). `None` without one.
pub fn corrupt_one_atom(m: &Molecule, rng: &mut impl Rng) -> Option<Molecule> {
    let carbons: Vec<usize> = (0..m.atom_count()).filter(|&i| m.atoms()[i].element == Element::C && !m.atoms()[i].aromatic)
        .collect();
    let &pick = carbons.choose(rng)?;
    let mut atoms = m.atoms().to_vec();
    atoms[pick].element = Element::from_symbol("Si").unwrap();
    Some(Molecule::new(atoms, m.bonds().to_vec()).unwrap())
}
