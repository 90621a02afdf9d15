//! Subgraph embedding of patterns into host molecules.
//!
//! An embedding is an injective map from pattern atoms to host atoms that
//! preserves atom constraints and maps every pattern bond onto a host bond of
//! the same order. Host bonds between matched atoms that the pattern does not
//! mention are allowed (the pattern is a subgraph, not an induced one).

use super::pattern::Pattern;
use crate::chem::Molecule;

/// All embeddings of `pattern` into `host`, at most `limit`, sorted by the
/// host canonical ranks of the images read in pattern-atom order.
pub fn embeddings(pattern: &Pattern, host: &Molecule, limit: usize) -> Vec<Vec<usize>> {
    let n = pattern.atom_count();
    if n == 0 || n > host.atom_count() {
        return Vec::new();
    }
    let order = search_order(pattern);
    let mut state = State {
        pattern,
        host,
        order: &order,
        image: vec![usize::MAX; n],
        used: vec![false; host.atom_count()],
        found: Vec::new(),
        limit,
    };
    state.extend(0);
    let ranks = host.canonical_ranks();
    let mut found = state.found;
    found.sort_by_cached_key(|e| e.iter().map(|&h| ranks[h]).collect::<Vec<_>>());
    found
}

/// Pattern atoms ordered so each one after the first of its component has an
/// earlier neighbor; entries carry that anchor neighbor.
fn search_order(pattern: &Pattern) -> Vec<(usize, Option<usize>)> {
    let g = &pattern.graph;
    let n = g.atom_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push((root, None));
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head].0;
            head += 1;
            for &(u, _) in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    order.push((u, Some(v)));
                }
            }
        }
    }
    order
}

struct State<'a> {
    pattern: &'a Pattern,
    host: &'a Molecule,
    order: &'a [(usize, Option<usize>)],
    image: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
    limit: usize,
}

impl State<'_> {
    fn extend(&mut self, depth: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if depth == self.order.len() {
            self.found.push(self.image.clone());
            return;
        }
        let (p, anchor) = self.order[depth];
        let candidates: Vec<usize> = match anchor {
            Some(a) => self.host.neighbors(self.image[a]).iter().map(|&(h, _)| h).collect(),
            None => (0..self.host.atom_count()).collect(),
        };
        for h in candidates {
            if self.used[h] || !self.feasible(p, h) {
                continue;
            }
            self.image[p] = h;
            self.used[h] = true;
            self.extend(depth + 1);
            self.used[h] = false;
            self.image[p] = usize::MAX;
        }
    }

    fn feasible(&self, p: usize, h: usize) -> bool {
        if !self.pattern.atom_matches(p, self.host, h) {
            return false;
        }
        self.pattern.graph.neighbors(p).iter().all(|&(q, order)| {
            let hq = self.image[q];
            hq == usize::MAX || self.host.bond_between(h, hq) == Some(order)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use proptest::prelude::*;

    fn pattern(text: &str) -> Pattern {
        Pattern::parse(text).unwrap()
    }

    /// Tries every injective map from pattern atoms to host atoms.
    fn brute_force(p: &Pattern, host: &Molecule) -> Vec<Vec<usize>> {
        fn go(p: &Pattern, host: &Molecule, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == p.atom_count() {
                let ok = (0..cur.len()).all(|i| p.atom_matches(i, host, cur[i]))
                    && p.graph
                        .bonds()
                        .iter()
                        .all(|b| host.bond_between(cur[b.begin], cur[b.end]) == Some(b.order));
                if ok {
                    out.push(cur.clone());
                }
                return;
            }
            for h in 0..host.atom_count() {
                if !cur.contains(&h) {
                    cur.push(h);
                    go(p, host, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(p, host, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    #[test]
    fn carbonyl_in_acetic_acid() {
        let host = parse_smiles("CC(=O)O").unwrap();
        let e = embeddings(&pattern("[C]=[O]"), &host, 100);
        assert_eq!(e.len(), 1);
        let e = embeddings(&pattern("[C][OH1]"), &host, 100);
        assert_eq!(e, vec![vec![1, 3]]);
    }

    #[test]
    fn hydrogen_constraint() {
        let host = parse_smiles("CCC").unwrap();
        assert_eq!(embeddings(&pattern("[CH3][C]"), &host, 100).len(), 2);
        assert_eq!(embeddings(&pattern("[CH2][C]"), &host, 100).len(), 2);
        assert_eq!(embeddings(&pattern("[CH1][C]"), &host, 100).len(), 0);
    }

    #[test]
    fn limit_is_respected() {
        let host = parse_smiles("C1CCCCC1").unwrap();
        assert_eq!(embeddings(&pattern("[C][C]"), &host, 5).len(), 5);
        assert_eq!(embeddings(&pattern("[C][C]"), &host, 100).len(), 12);
    }

    #[test]
    fn disconnected_pattern() {
        let host = parse_smiles("OCCO").unwrap();
        assert_eq!(embeddings(&pattern("([O].[O])"), &host, 100).len(), 2);
    }

    const HOSTS: &[&str] = &[
        "CC(=O)OCC",
        "c1ccccc1O",
        "NCC(=O)O",
        "C1CC1C=C",
        "CC(C)(C)N",
        "O=C1CCCN1",
        "C#CCBr",
        "c1ccncc1C",
        "CCOC(=O)C(C)N",
        "[NH3+]CC([O-])=O",
    ];

    const PATTERNS: &[&str] = &[
        "[C][C]",
        "[C]=[O]",
        "[C:1](=[O])[O]",
        "[c][c]",
        "[C][N]",
        "[CH2][C]",
        "[C]1[C][C]1",
        "[C]([C])([C])[C]",
        "([O].[C])",
        "[c][n][c]",
        "[C][O][C]",
        "[N+]",
        "[c]:[c]-[O]",
        "[CH3][C]([CH3])",
    ];

    #[test]
    fn agrees_with_brute_force_on_fixed_pairs() {
        for h in HOSTS {
            let host = parse_smiles(h).unwrap();
            for p in PATTERNS {
                let pat = pattern(p);
                let mut fast = embeddings(&pat, &host, usize::MAX);
                fast.sort();
                assert_eq!(fast, brute_force(&pat, &host), "{p} in {h}");
            }
        }
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force_on_subgraphs(
            hi in 0..HOSTS.len(),
            picks in proptest::collection::btree_set(0usize..10, 1..5),
            pin in proptest::collection::vec(any::<bool>(), 5),
        ) {
            // a pattern cut out of a host, matched against every host
            let src = parse_smiles(HOSTS[hi]).unwrap();
            let atoms: Vec<usize> = picks.into_iter().filter(|&a| a < src.atom_count()).collect();
            prop_assume!(!atoms.is_empty());
            let graph = src.induced(&atoms);
            let hydrogens = (0..graph.atom_count())
                .map(|i| pin[i].then_some(graph.atoms()[i].hydrogens))
                .collect();
            let pat = Pattern { labels: vec![0; graph.atom_count()], graph, hydrogens };
            for h in HOSTS {
                let host = parse_smiles(h).unwrap();
                let mut fast = embeddings(&pat, &host, usize::MAX);
                fast.sort();
                prop_assert_eq!(fast, brute_force(&pat, &host));
            }
        }
    }
}
