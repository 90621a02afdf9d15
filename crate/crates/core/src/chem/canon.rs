//! Canonical labeling of small attributed graphs.
//!
//! Vertex colors are refined by neighbor multisets until stable. Remaining
//! ties are broken by individualizing each member of the first tied cell in
//! turn and refining again; the leaf whose relabeled graph has the smallest
//! key wins. Automorphisms discovered along the way prune branches whose
//! subtrees are isomorphic to ones already explored.

use super::molecule::{Canonical, Molecule};
use super::writer;

/// Search leaves explored before the best so far is accepted.
const LEAF_LIMIT: usize = 1 << 14;

/// Undirected graph with vertex invariants and small integer edge labels.
pub(crate) struct ColoredGraph {
    pub invariants: Vec<u64>,
    pub adjacency: Vec<Vec<(usize, u8)>>,
}

impl ColoredGraph {
    pub fn from_molecule(m: &Molecule) -> ColoredGraph {
        let invariants = m
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                (m.degree(i) as u64) << 48
                    | (a.element.atomic_number() as u64) << 40
                    | ((a.charge as i64 + 64) as u64) << 32
                    | (a.aromatic as u64) << 24
                    | (a.hydrogens as u64) << 16
            })
            .collect();
        let adjacency = (0..m.atom_count())
            .map(|i| m.neighbors(i).iter().map(|&(n, o)| (n, o.code())).collect())
            .collect();
        ColoredGraph {
            invariants,
            adjacency,
        }
    }

    fn len(&self) -> usize {
        self.invariants.len()
    }
}

pub(crate) fn canonicalize(m: &Molecule) -> Canonical {
    let ranks = canonical_ranks(&ColoredGraph::from_molecule(m));
    let smiles = writer::write_molecule(m, &ranks, None);
    Canonical { smiles, ranks }
}

/// Rank of every vertex under the canonical labeling.
pub(crate) fn canonical_ranks(g: &ColoredGraph) -> Vec<u32> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let classes = initial_classes(&g.invariants);
    let mut colors = classes.clone();
    let mut scratch = Scratch::default();
    refine(g, &mut colors, &mut scratch);
    if is_discrete(&colors) {
        return colors;
    }
    let mut search = Search {
        graph: g,
        classes: &classes,
        best: None,
        automorphisms: Vec::new(),
        leaves: 0,
        scratch,
    };
    let mut prefix = Vec::new();
    search.explore(colors, &mut prefix);
    search.best.expect("search visits at least one leaf").1
}

/// Color of each vertex = number of vertices with a strictly smaller invariant.
fn initial_classes(invariants: &[u64]) -> Vec<u32> {
    let mut sorted: Vec<u64> = invariants.to_vec();
    sorted.sort_unstable();
    invariants
        .iter()
        .map(|v| sorted.partition_point(|x| x < v) as u32)
        .collect()
}

fn is_discrete(colors: &[u32]) -> bool {
    let mut seen = vec![false; colors.len()];
    for &c in colors {
        if std::mem::replace(&mut seen[c as usize], true) {
            return false;
        }
    }
    true
}

#[derive(Default)]
struct Scratch {
    signatures: Vec<Vec<u64>>,
    order: Vec<usize>,
}

/// Refines `colors` to the coarsest stable partition below it. Colors are
/// cell start positions, so a vertex's color never decreases relative to
/// vertices of other cells and existing cell order is kept.
fn refine(g: &ColoredGraph, colors: &mut [u32], s: &mut Scratch) {
    let n = colors.len();
    s.signatures.resize_with(n, Vec::new);
    let mut cells = count_cells(colors);
    loop {
        for v in 0..n {
            let sig = &mut s.signatures[v];
            sig.clear();
            sig.push(colors[v] as u64);
            let start = sig.len();
            sig.extend(
                g.adjacency[v]
                    .iter()
                    .map(|&(u, label)| (colors[u] as u64) << 8 | label as u64),
            );
            sig[start..].sort_unstable();
        }
        s.order.clear();
        s.order.extend(0..n);
        let sigs = &s.signatures;
        s.order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut start = 0;
        for i in 0..n {
            if i > 0 && sigs[s.order[i]] != sigs[s.order[i - 1]] {
                start = i;
            }
            colors[s.order[i]] = start as u32;
        }
        let new_cells = count_cells(colors);
        if new_cells == cells {
            return;
        }
        cells = new_cells;
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut seen = vec![false; colors.len()];
    colors
        .iter()
        .filter(|&&c| !std::mem::replace(&mut seen[c as usize], true))
        .count()
}

struct Search<'a> {
    graph: &'a ColoredGraph,
    classes: &'a [u32],
    best: Option<(Vec<u64>, Vec<u32>)>,
    automorphisms: Vec<Vec<usize>>,
    leaves: usize,
    scratch: Scratch,
}

impl Search<'_> {
    fn explore(&mut self, colors: Vec<u32>, prefix: &mut Vec<usize>) {
        if is_discrete(&colors) {
            self.leaf(colors);
            return;
        }
        // first non-singleton cell, by position
        let n = colors.len();
        let mut size = vec![0u32; n];
        for &c in &colors {
            size[c as usize] += 1;
        }
        let target = (0..n)
            .find(|&c| size[c] > 1)
            .expect("non-discrete partition has a tied cell") as u32;
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();

        let mut explored: Vec<usize> = Vec::new();
        for &v in &members {
            if self.leaves >= LEAF_LIMIT {
                return;
            }
            if !explored.is_empty() && self.in_explored_orbit(v, &explored, prefix) {
                continue;
            }
            let mut child = colors.clone();
            for &w in &members {
                if w != v {
                    child[w] = target + 1;
                }
            }
            refine(self.graph, &mut child, &mut self.scratch);
            prefix.push(v);
            self.explore(child, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    /// Whether some known automorphism fixing `prefix` pointwise maps an
    /// explored vertex onto `v`.
    fn in_explored_orbit(&self, v: usize, explored: &[usize], prefix: &[usize]) -> bool {
        let n = self.graph.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut any = false;
        for perm in &self.automorphisms {
            if prefix.iter().all(|&p| perm[p] == p) {
                any = true;
                for x in 0..n {
                    let (a, b) = (find(&mut parent, x), find(&mut parent, perm[x]));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&e| find(&mut parent, e) == root)
    }

    fn leaf(&mut self, ranks: Vec<u32>) {
        self.leaves += 1;
        let key = leaf_key(self.graph, self.classes, &ranks);
        match &self.best {
            None => self.best = Some((key, ranks)),
            Some((best_key, best_ranks)) => match key.cmp(best_key) {
                std::cmp::Ordering::Less => self.best = Some((key, ranks)),
                std::cmp::Ordering::Equal => {
                    // vertex with rank r here corresponds to rank r in the best leaf
                    let n = ranks.len();
                    let mut best_at = vec![0usize; n];
                    for (v, &r) in best_ranks.iter().enumerate() {
                        best_at[r as usize] = v;
                    }
                    let perm: Vec<usize> = (0..n).map(|v| best_at[ranks[v] as usize]).collect();
                    if perm.iter().enumerate().any(|(i, &p)| i != p) {
                        self.automorphisms.push(perm);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }
}

/// Serialization of the graph relabeled by `ranks`: per rank, the vertex's
/// initial class followed by its sorted (neighbor rank, edge label) list.
fn leaf_key(g: &ColoredGraph, classes: &[u32], ranks: &[u32]) -> Vec<u64> {
    let n = ranks.len();
    let mut at = vec![0usize; n];
    for (v, &r) in ranks.iter().enumerate() {
        at[r as usize] = v;
    }
    let mut key = Vec::with_capacity(n * 4);
    let mut nbrs: Vec<u64> = Vec::new();
    for &v in &at {
        key.push(classes[v] as u64);
        nbrs.clear();
        nbrs.extend(
            g.adjacency[v]
                .iter()
                .map(|&(u, label)| (ranks[u] as u64) << 8 | label as u64),
        );
        nbrs.sort_unstable();
        key.push(u64::MAX - nbrs.len() as u64);
        key.extend_from_slice(&nbrs);
    }
    key
}

#[cfg(test)]
mod tests {
    use crate::chem::parse_smiles;

    fn canon(s: &str) -> String {
        parse_smiles(s).unwrap().canonical_smiles().to_string()
    }

    #[test]
    fn isomorphic_inputs_agree() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(C)(C)O"), canon("CC(O)C"));
        assert_eq!(canon("c1ccccc1O"), canon("Oc1ccccc1"));
        assert_eq!(canon("C1CC1C"), canon("CC1CC1"));
        assert_ne!(canon("CCO"), canon("COC"));
    }

    #[test]
    fn fixed_point() {
        for s in [
            "CC(=O)Oc1ccccc1C(=O)O",
            "C1CC2CCC1CC2",
            "c1ccc2ccccc2c1",
            "[NH4+].[Cl-]",
            "C12C3C4C1C5C2C3C45",
            "O=C(NCc1ccco1)c1ccc[nH]1",
        ] {
            let c = canon(s);
            assert_eq!(canon(&c), c, "{s}");
        }
    }

    #[test]
    fn symmetric_graphs_terminate_with_one_answer() {
        // cubane: every vertex equivalent, 48 automorphisms
        let cubane = parse_smiles("C12C3C4C1C5C2C3C45").unwrap();
        let reference = cubane.canonical_smiles().to_string();
        let n = cubane.atom_count();
        for shift in 1..n {
            let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            assert_eq!(cubane.reordered(&order).canonical_smiles(), reference);
        }
    }

    #[test]
    fn ranks_are_a_permutation() {
        let m = parse_smiles("CC(C)(C)c1ccc(cc1)C(C)(C)C").unwrap();
        let mut r = m.canonical_ranks().to_vec();
        r.sort_unstable();
        assert_eq!(r, (0..m.atom_count() as u32).collect::<Vec<_>>());
    }
}
