//! Reaction-center detection and template extraction from mapped reactions.

use super::pattern::Pattern;
use super::{Direction, Template, TemplateError, TemplateLibrary};
use crate::chem::Molecule;
use crate::reaction::{Reaction, ReactionDataset};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Product atoms whose environment changes across the reaction: a bond to
/// them is formed, broken or changes order, or their charge, hydrogen count
/// or aromaticity differs from the mapped reactant atom. Unmapped product
/// atoms are always part of the center.
pub fn detect_reaction_center(r: &Reaction) -> Result<BTreeSet<usize>, TemplateError> {
    let map = r.atom_map.as_ref().ok_or(TemplateError::Unmapped)?;
    if map.mapped_count() == 0 {
        return Err(TemplateError::NoMappedAtoms);
    }
    r.validate_map().map_err(|_| TemplateError::BadAtomMap)?;
    let inv = map.reactant_to_product(&r.reactants);
    let product = &r.product;
    let mut center = BTreeSet::new();
    for p in 0..product.atom_count() {
        let Some((ri, ai)) = map.product_to_reactant[p] else {
            center.insert(p);
            continue;
        };
        let reactant = &r.reactants[ri];
        let (pa, ra) = (&product.atoms()[p], &reactant.atoms()[ai]);
        let changed_atom =
            pa.charge != ra.charge || pa.hydrogens != ra.hydrogens || pa.aromatic != ra.aromatic;
        let changed_product_bond = product.neighbors(p).iter().any(|&(q, order)| {
            match map.product_to_reactant[q] {
                Some((rj, aj)) if rj == ri => reactant.bond_between(ai, aj) != Some(order),
                _ => true,
            }
        });
        let changed_reactant_bond = reactant.neighbors(ai).iter().any(|&(b, order)| match inv
            [ri][b]
        {
            Some(q) => product.bond_between(p, q) != Some(order),
            None => true,
        });
        if changed_atom || changed_product_bond || changed_reactant_bond {
            center.insert(p);
        }
    }
    Ok(center)
}

/// Atoms within `radius` bonds of any seed.
fn ball(m: &Molecule, seeds: impl IntoIterator<Item = usize>, radius: u32) -> BTreeSet<usize> {
    let mut dist = vec![u32::MAX; m.atom_count()];
    let mut queue = VecDeque::new();
    for s in seeds {
        if dist[s] == u32::MAX {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] == radius {
            continue;
        }
        for &(u, _) in m.neighbors(v) {
            if dist[u] == u32::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    (0..m.atom_count()).filter(|&i| dist[i] != u32::MAX).collect()
}

/// Extracts the retro template of one mapped reaction.
///
/// The scope is the center plus everything within `radius` bonds of it,
/// measured on the product and, through the map, on the reactants; reactant
/// atoms absent from the product (leaving groups) are always in scope. Center
/// and leaving atoms pin their hydrogen count, context atoms do not.
pub fn extract_template(r: &Reaction, radius: u32) -> Result<Template, TemplateError> {
    let center = detect_reaction_center(r)?;
    if center.is_empty() {
        return Err(TemplateError::EmptyCenter);
    }
    let map = r.atom_map.as_ref().expect("center detection checked the map");
    let inv = map.reactant_to_product(&r.reactants);
    let product = &r.product;

    let mut scope = ball(product, center.iter().copied(), radius);
    for (ri, reactant) in r.reactants.iter().enumerate() {
        let seeds: Vec<usize> = (0..reactant.atom_count())
            .filter(|&a| inv[ri][a].is_some_and(|p| center.contains(&p)))
            .collect();
        for a in ball(reactant, seeds, radius) {
            if let Some(p) = inv[ri][a] {
                scope.insert(p);
            }
        }
    }

    let scope: Vec<usize> = scope.into_iter().collect();
    let mut label = vec![0u32; product.atom_count()];
    let mut next = 1;
    for &p in &scope {
        if map.product_to_reactant[p].is_some() {
            label[p] = next;
            next += 1;
        }
    }
    let product_pattern = Pattern {
        graph: product.induced(&scope),
        hydrogens: scope
            .iter()
            .map(|&p| center.contains(&p).then_some(product.atoms()[p].hydrogens))
            .collect(),
        labels: scope.iter().map(|&p| label[p]).collect(),
    };

    let mut reactant_patterns = Vec::new();
    for (ri, reactant) in r.reactants.iter().enumerate() {
        let atoms: Vec<usize> = (0..reactant.atom_count())
            .filter(|&a| inv[ri][a].is_none_or(|p| label[p] != 0))
            .collect();
        if atoms.is_empty() {
            continue;
        }
        reactant_patterns.push(Pattern {
            graph: reactant.induced(&atoms),
            hydrogens: atoms
                .iter()
                .map(|&a| match inv[ri][a] {
                    Some(p) if !center.contains(&p) => None,
                    _ => Some(reactant.atoms()[a].hydrogens),
                })
                .collect(),
            labels: atoms.iter().map(|&a| inv[ri][a].map_or(0, |p| label[p])).collect(),
        });
    }

    Ok(Template::new(
        Direction::Retro,
        vec![product_pattern],
        reactant_patterns,
        radius,
        1,
    ))
}

/// Outcome of fitting template libraries to a dataset.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub retro: TemplateLibrary,
    pub forward: TemplateLibrary,
    /// Reactions that carried an atom map.
    pub mappable: usize,
    /// Reactions without an atom map, skipped.
    pub unmapped: usize,
    /// Mapped reactions no template could be taken from, with the reason.
    pub failed: Vec<(String, TemplateError)>,
}

/// Extracts and merges templates from every mapped reaction; isomorphic
/// templates are merged with summed support.
pub fn extract_templates(ds: &ReactionDataset, radius: u32) -> Extraction {
    extract_from_reactions(&ds.reactions, radius)
}

/// As [`extract_templates`], over any reaction list (repeats count toward
/// support).
pub fn extract_from_reactions(reactions: &[Reaction], radius: u32) -> Extraction {
    let mut merged: BTreeMap<String, Template> = BTreeMap::new();
    let (mut mappable, mut unmapped) = (0, 0);
    let mut failed = Vec::new();
    for r in reactions {
        if r.atom_map.is_none() {
            unmapped += 1;
            continue;
        }
        mappable += 1;
        match extract_template(r, radius) {
            Ok(t) => match merged.get_mut(t.text()) {
                Some(existing) => existing.support += t.support,
                None => {
                    merged.insert(t.text().to_string(), t);
                }
            },
            Err(e) => failed.push((r.source_id.clone(), e)),
        }
    }
    let retro: Vec<Template> = merged.into_values().collect();
    let forward: Vec<Template> = retro.iter().map(Template::reversed).collect();
    Extraction {
        retro: TemplateLibrary::new(Direction::Retro, retro),
        forward: TemplateLibrary::new(Direction::Forward, forward),
        mappable,
        unmapped,
        failed,
    }
}
