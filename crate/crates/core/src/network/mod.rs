//! The reaction network: a bipartite graph of molecules and reactions built
//! from a dataset, with target discovery, route enumeration, dataset
//! splitting and the starting-material stock.

mod enumerate;
mod route;
mod split;

pub use enumerate::{extract_routes, RouteOptions, DEFAULT_MAX_DEPTH, DEFAULT_ROUTE_BUDGET};
pub use route::{RouteError, RouteStep, SyntheticRoute};
pub use split::{
    default_stock, split_by_counts, split_dataset, Split, SplitError, StockReadError, StockSet,
};

use crate::chem::Molecule;
use crate::reaction::ReactionDataset;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::Direction::{Incoming, Outgoing};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone)]
pub enum Node {
    Molecule(Molecule),
    /// Index of the reaction in the source dataset.
    Reaction(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("molecule {0} is not in the network")]
    UnknownMolecule(String),
}

/// Molecules and reactions with edges reactant → reaction → product.
#[derive(Debug, Clone)]
pub struct ReactionNetwork {
    graph: DiGraph<Node, ()>,
    molecules: BTreeMap<String, NodeIndex>,
    reactions: Vec<NodeIndex>,
    /// Canonical `reactants>>product` text per reaction, for ordering.
    reaction_text: Vec<String>,
}

/// Builds the network; each dataset reaction becomes one reaction node.
pub fn build_network(ds: &ReactionDataset) -> ReactionNetwork {
    let mut graph = DiGraph::new();
    let mut molecules: BTreeMap<String, NodeIndex> = BTreeMap::new();
    let mut node_for = |graph: &mut DiGraph<Node, ()>, m: &Molecule| {
        *molecules
            .entry(m.canonical_smiles().to_string())
            .or_insert_with(|| graph.add_node(Node::Molecule(m.clone())))
    };
    let mut reactions = Vec::with_capacity(ds.len());
    let mut reaction_text = Vec::with_capacity(ds.len());
    for (i, r) in ds.reactions.iter().enumerate() {
        let rx = graph.add_node(Node::Reaction(i));
        let mut reactants: Vec<&Molecule> = r.reactants.iter().collect();
        reactants.sort();
        reactants.dedup();
        for m in reactants {
            let n = node_for(&mut graph, m);
            graph.add_edge(n, rx, ());
        }
        let p = node_for(&mut graph, &r.product);
        graph.add_edge(rx, p, ());
        reactions.push(rx);
        reaction_text.push(r.canonical_text());
    }
    ReactionNetwork {
        graph,
        molecules,
        reactions,
        reaction_text,
    }
}

impl ReactionNetwork {
    pub fn molecule_count(&self) -> usize {
        self.molecules.len()
    }

    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn graph(&self) -> &DiGraph<Node, ()> {
        &self.graph
    }

    /// Canonical SMILES of every molecule, sorted.
    pub fn molecule_names(&self) -> impl Iterator<Item = &str> {
        self.molecules.keys().map(String::as_str)
    }

    pub fn molecule(&self, smiles: &str) -> Option<&Molecule> {
        self.molecules.get(smiles).map(|&n| self.molecule_at(n))
    }

    fn molecule_at(&self, n: NodeIndex) -> &Molecule {
        match &self.graph[n] {
            Node::Molecule(m) => m,
            Node::Reaction(_) => unreachable!("molecule index points at a reaction"),
        }
    }

    fn index(&self, m: &Molecule) -> Result<NodeIndex, NetworkError> {
        self.molecules
            .get(m.canonical_smiles())
            .copied()
            .ok_or_else(|| NetworkError::UnknownMolecule(m.to_string()))
    }

    /// Number of reactions consuming `m`.
    pub fn out_degree(&self, m: &Molecule) -> Result<usize, NetworkError> {
        Ok(self.graph.neighbors_directed(self.index(m)?, Outgoing).count())
    }

    /// Number of reactions producing `m`.
    pub fn in_degree(&self, m: &Molecule) -> Result<usize, NetworkError> {
        Ok(self.graph.neighbors_directed(self.index(m)?, Incoming).count())
    }

    /// Dataset indices of the reactions producing `m`, ordered by their
    /// canonical reaction text.
    pub fn producers(&self, m: &Molecule) -> Result<Vec<usize>, NetworkError> {
        let mut rs: Vec<usize> = self
            .graph
            .neighbors_directed(self.index(m)?, Incoming)
            .map(|n| match self.graph[n] {
                Node::Reaction(i) => i,
                Node::Molecule(_) => unreachable!("network is bipartite"),
            })
            .collect();
        rs.sort_by(|&a, &b| self.reaction_text[a].cmp(&self.reaction_text[b]));
        Ok(rs)
    }

    /// Distinct reactants of reaction `i`, sorted.
    pub fn reactants(&self, i: usize) -> Vec<&Molecule> {
        let mut ms: Vec<&Molecule> = self
            .graph
            .neighbors_directed(self.reactions[i], Incoming)
            .map(|n| self.molecule_at(n))
            .collect();
        ms.sort();
        ms
    }

    pub fn product(&self, i: usize) -> &Molecule {
        let n = self
            .graph
            .neighbors_directed(self.reactions[i], Outgoing)
            .next()
            .expect("every reaction has a product");
        self.molecule_at(n)
    }

    pub fn reaction_text(&self, i: usize) -> &str {
        &self.reaction_text[i]
    }
}

/// Molecules consumed by no reaction but produced by at least one, sorted.
pub fn find_targets(net: &ReactionNetwork) -> Vec<Molecule> {
    net.molecules
        .values()
        .filter(|&&n| {
            net.graph.neighbors_directed(n, Outgoing).next().is_none()
                && net.graph.neighbors_directed(n, Incoming).next().is_some()
        })
        .map(|&n| net.molecule_at(n).clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use crate::reaction::{deduplicate, parse_reaction_smiles};

    pub(crate) fn network(lines: &[&str]) -> ReactionNetwork {
        let rs = lines
            .iter()
            .enumerate()
            .map(|(i, l)| parse_reaction_smiles(l, &i.to_string()).unwrap())
            .collect();
        build_network(&deduplicate(rs))
    }

    fn m(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn single_reaction() {
        let net = network(&["C.O>>CO"]);
        assert_eq!(net.molecule_count(), 3);
        assert_eq!(net.reaction_count(), 1);
        assert_eq!(net.out_degree(&m("C")).unwrap(), 1);
        assert_eq!(net.out_degree(&m("O")).unwrap(), 1);
        assert_eq!(net.out_degree(&m("CO")).unwrap(), 0);
        assert_eq!(find_targets(&net), vec![m("CO")]);
    }

    #[test]
    fn chain_and_diamond() {
        let net = network(&["C>>CC", "CC>>CCC"]);
        assert_eq!(find_targets(&net), vec![m("CCC")]);
        let net = network(&["C>>CC", "C>>CO", "CC.CO>>CCOC"]);
        assert_eq!(find_targets(&net), vec![m("CCOC")]);
        let net = network(&["C>>CC", "N>>NN"]);
        assert_eq!(find_targets(&net).len(), 2);
    }

    #[test]
    fn unknown_molecule() {
        let net = network(&["C>>CC"]);
        assert!(net.out_degree(&m("N")).is_err());
    }
}
