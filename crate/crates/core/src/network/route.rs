//! Synthetic routes: a target, the reactions leading to it, the intermediates
//! they pass through and the starting materials they begin from.

use crate::chem::Molecule;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// One reaction of a route.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RouteStep {
    pub product: Molecule,
    /// Sorted, without repeats.
    pub reactants: Vec<Molecule>,
}

impl RouteStep {
    pub fn new(product: Molecule, mut reactants: Vec<Molecule>) -> RouteStep {
        reactants.sort();
        reactants.dedup();
        RouteStep { product, reactants }
    }
}

/// A route to `target`. Steps are stored in application order: every step's
/// reactants are leaves or products of earlier steps, and the last step
/// makes the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRoute {
    pub target: Molecule,
    pub steps: Vec<RouteStep>,
    pub intermediates: Vec<Molecule>,
    pub leaves: Vec<Molecule>,
    /// Longest chain of reactions from a leaf to the target.
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("route has no steps")]
    NoSteps,
    #[error("molecule {0} is made by more than one step")]
    DuplicateProduct(String),
    #[error("no step makes the target")]
    TargetNotMade,
    #[error("step {0} needs {1}, which is neither a leaf nor made earlier")]
    Unavailable(usize, String),
    #[error("step {0} makes {1}, which nothing later uses")]
    Dangling(usize, String),
    #[error("recorded {0} disagree with the steps")]
    Inconsistent(&'static str),
    #[error("depth {0} exceeds the limit {1}")]
    TooDeep(usize, usize),
}

impl SyntheticRoute {
    /// Builds a route from its steps in any order; each molecule may be made
    /// by at most one step. Steps are put into a deterministic application
    /// order (reactant subtrees first, in canonical order).
    pub fn from_steps(
        target: Molecule,
        steps: Vec<RouteStep>,
        confidence: Option<f64>,
    ) -> Result<SyntheticRoute, RouteError> {
        if steps.is_empty() {
            return Err(RouteError::NoSteps);
        }
        let mut by_product: BTreeMap<Molecule, RouteStep> = BTreeMap::new();
        for s in steps {
            let name = s.product.canonical_smiles().to_string();
            if by_product.insert(s.product.clone(), s).is_some() {
                return Err(RouteError::DuplicateProduct(name));
            }
        }
        if !by_product.contains_key(&target) {
            return Err(RouteError::TargetNotMade);
        }

        fn place(
            m: &Molecule,
            by_product: &BTreeMap<Molecule, RouteStep>,
            placed: &mut BTreeSet<Molecule>,
            on_path: &mut BTreeSet<Molecule>,
            order: &mut Vec<RouteStep>,
        ) -> Result<(), RouteError> {
            let Some(step) = by_product.get(m) else {
                return Ok(());
            };
            if placed.contains(m) {
                return Ok(());
            }
            if !on_path.insert(m.clone()) {
                return Err(RouteError::Unavailable(order.len(), m.to_string()));
            }
            for r in &step.reactants {
                place(r, by_product, placed, on_path, order)?;
            }
            on_path.remove(m);
            placed.insert(m.clone());
            order.push(step.clone());
            Ok(())
        }

        let mut order = Vec::with_capacity(by_product.len());
        place(
            &target,
            &by_product,
            &mut BTreeSet::new(),
            &mut BTreeSet::new(),
            &mut order,
        )?;
        if order.len() != by_product.len() {
            // some step is not connected to the target
            let used: BTreeSet<&Molecule> = order.iter().map(|s| &s.product).collect();
            let stray = by_product.keys().find(|p| !used.contains(p)).expect("a stray step");
            return Err(RouteError::Dangling(order.len(), stray.to_string()));
        }

        let products: BTreeSet<&Molecule> = order.iter().map(|s| &s.product).collect();
        let leaves: BTreeSet<Molecule> = order
            .iter()
            .flat_map(|s| &s.reactants)
            .filter(|r| !products.contains(r))
            .cloned()
            .collect();
        let intermediates: Vec<Molecule> = order
            .iter()
            .map(|s| s.product.clone())
            .filter(|p| *p != target)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let depth = chain_depth(&order);
        Ok(SyntheticRoute {
            target,
            steps: order,
            intermediates,
            leaves: leaves.into_iter().collect(),
            depth,
            confidence,
        })
    }

    /// Checks every structural invariant: application order reaches exactly
    /// the target, leaves and intermediates agree with the steps and are
    /// disjoint, and the depth is recorded correctly and within `max_depth`.
    pub fn validate(&self, max_depth: usize) -> Result<(), RouteError> {
        if self.steps.is_empty() {
            return Err(RouteError::NoSteps);
        }
        let leaves: BTreeSet<&Molecule> = self.leaves.iter().collect();
        let mut available: BTreeSet<&Molecule> = leaves.clone();
        let mut made: BTreeSet<&Molecule> = BTreeSet::new();
        for (i, s) in self.steps.iter().enumerate() {
            for r in &s.reactants {
                if !available.contains(r) {
                    return Err(RouteError::Unavailable(i, r.to_string()));
                }
            }
            if !made.insert(&s.product) {
                return Err(RouteError::DuplicateProduct(s.product.to_string()));
            }
            available.insert(&s.product);
            let used_later = self.steps[i + 1..].iter().any(|t| t.reactants.contains(&s.product));
            if s.product != self.target && !used_later {
                return Err(RouteError::Dangling(i, s.product.to_string()));
            }
        }
        if self.steps.last().map(|s| &s.product) != Some(&self.target) {
            return Err(RouteError::TargetNotMade);
        }
        let only_reactants: BTreeSet<&Molecule> = self
            .steps
            .iter()
            .flat_map(|s| &s.reactants)
            .filter(|r| !made.contains(r))
            .collect();
        if only_reactants != leaves {
            return Err(RouteError::Inconsistent("leaves"));
        }
        let intermediates: BTreeSet<&Molecule> =
            made.iter().copied().filter(|p| **p != self.target).collect();
        if intermediates != self.intermediates.iter().collect() {
            return Err(RouteError::Inconsistent("intermediates"));
        }
        if leaves.iter().any(|l| made.contains(l)) {
            return Err(RouteError::Inconsistent("leaves"));
        }
        if chain_depth(&self.steps) != self.depth {
            return Err(RouteError::Inconsistent("depth"));
        }
        if self.depth > max_depth {
            return Err(RouteError::TooDeep(self.depth, max_depth));
        }
        Ok(())
    }

    /// Canonical identity: `(leaf set, step set)`.
    pub fn key(&self) -> (Vec<String>, Vec<String>) {
        let leaves = self.leaves.iter().map(|m| m.canonical_smiles().to_string()).collect();
        let mut steps: Vec<String> = self
            .steps
            .iter()
            .map(|s| {
                let rs: Vec<&str> = s.reactants.iter().map(|m| m.canonical_smiles()).collect();
                format!("{}>>{}", rs.join("."), s.product)
            })
            .collect();
        steps.sort();
        (leaves, steps)
    }

    /// Leaf canonical SMILES as a set.
    pub fn leaf_set(&self) -> BTreeSet<String> {
        self.leaves.iter().map(|m| m.canonical_smiles().to_string()).collect()
    }
}

/// Depth of the last step's product, where a step's depth is one more than
/// the deepest step making one of its reactants. Steps must be in
/// application order.
fn chain_depth(steps: &[RouteStep]) -> usize {
    let mut depth: BTreeMap<&Molecule, usize> = BTreeMap::new();
    for s in steps {
        let d = 1 + s.reactants.iter().filter_map(|r| depth.get(r)).max().copied().unwrap_or(0);
        depth.insert(&s.product, d);
    }
    depth.values().max().copied().unwrap_or(0)
}
