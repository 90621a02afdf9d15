//! Reaction records: parsing of reaction SMILES, cleaning and deduplication.

use crate::chem::{self, parse_mapped, Molecule, ParseError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReactionError {
    #[error("expected 'reactants>reagents>products', got {0} field(s)")]
    Format(usize),
    #[error("reaction has no reactants")]
    EmptyReactants,
    #[error("reaction has no product")]
    EmptyProduct,
    #[error("atom map number {0} used more than once on one side")]
    DuplicateMapNumber(u32),
    #[error("atom map references a missing atom")]
    BadAtomMap,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Correspondence from product atoms to `(reactant index, atom index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomMap {
    pub product_to_reactant: Vec<Option<(usize, usize)>>,
}

impl AtomMap {
    pub fn mapped_count(&self) -> usize {
        self.product_to_reactant.iter().flatten().count()
    }

    /// Inverse lookup: for each reactant, the product atom each atom maps to.
    pub fn reactant_to_product(&self, reactants: &[Molecule]) -> Vec<Vec<Option<usize>>> {
        let mut inv: Vec<Vec<Option<usize>>> =
            reactants.iter().map(|r| vec![None; r.atom_count()]).collect();
        for (p, m) in self.product_to_reactant.iter().enumerate() {
            if let Some((ri, ai)) = *m {
                inv[ri][ai] = Some(p);
            }
        }
        inv
    }
}

/// Reactant set to main product, optionally atom-mapped.
#[derive(Debug, Clone)]
pub struct Reaction {
    pub reactants: Vec<Molecule>,
    pub product: Molecule,
    pub atom_map: Option<AtomMap>,
    pub source_id: String,
}

impl Reaction {
    /// Checks the map is injective and in range.
    pub fn validate_map(&self) -> Result<(), ReactionError> {
        let Some(map) = &self.atom_map else {
            return Ok(());
        };
        if map.product_to_reactant.len() != self.product.atom_count() {
            return Err(ReactionError::BadAtomMap);
        }
        let mut seen = HashSet::new();
        for &(ri, ai) in map.product_to_reactant.iter().flatten() {
            let ok = self.reactants.get(ri).is_some_and(|r| ai < r.atom_count());
            if !ok || !seen.insert((ri, ai)) {
                return Err(ReactionError::BadAtomMap);
            }
        }
        Ok(())
    }

    pub fn product_in_reactants(&self) -> bool {
        self.reactants.contains(&self.product)
    }

    /// Sorted canonical SMILES of the reactants.
    pub fn reactant_key(&self) -> Vec<String> {
        let mut k: Vec<String> = self.reactants.iter().map(chem::canonical_smiles).collect();
        k.sort();
        k
    }

    /// `(sorted reactants, product)` identity used for deduplication.
    pub fn key(&self) -> (Vec<String>, String) {
        (self.reactant_key(), chem::canonical_smiles(&self.product))
    }

    /// `reactants>>product` in canonical form, without atom maps.
    pub fn canonical_text(&self) -> String {
        format!("{}>>{}", self.reactant_key().join("."), self.product)
    }

    /// Reaction SMILES with atom maps (product atom `i` carries number `i+1`).
    pub fn mapped_text(&self) -> Option<String> {
        let map = self.atom_map.as_ref()?;
        let mut product_maps = vec![0u32; self.product.atom_count()];
        let mut reactant_maps: Vec<Vec<u32>> = self
            .reactants
            .iter()
            .map(|r| vec![0; r.atom_count()])
            .collect();
        for (p, m) in map.product_to_reactant.iter().enumerate() {
            if let Some((ri, ai)) = *m {
                product_maps[p] = p as u32 + 1;
                reactant_maps[ri][ai] = p as u32 + 1;
            }
        }
        let reactants: Vec<String> = self
            .reactants
            .iter()
            .zip(&reactant_maps)
            .map(|(r, m)| chem::write_mapped(r, m))
            .collect();
        Some(format!(
            "{}>>{}",
            reactants.join("."),
            chem::write_mapped(&self.product, &product_maps)
        ))
    }
}

fn mapped_components(text: &str) -> Result<Vec<(Molecule, Vec<u32>)>, ParseError> {
    let parsed = parse_mapped(text)?;
    let m = &parsed.molecule;
    Ok(m.component_atoms()
        .into_iter()
        .map(|atoms| {
            let maps = atoms.iter().map(|&a| parsed.maps[a]).collect();
            (m.induced(&atoms), maps)
        })
        .collect())
}

/// Parses `reactants>reagents>products`. Reagents are dropped; of several
/// products only the largest by heavy-atom count is kept (ties: smallest
/// canonical SMILES). Atom maps are kept when both sides carry them.
pub fn parse_reaction_smiles(line: &str, source_id: &str) -> Result<Reaction, ReactionError> {
    let fields: Vec<&str> = line.trim().split('>').collect();
    if fields.len() != 3 {
        return Err(ReactionError::Format(fields.len()));
    }
    let (lhs, rhs) = (fields[0].trim(), fields[2].trim());
    if lhs.is_empty() {
        return Err(ReactionError::EmptyReactants);
    }
    if rhs.is_empty() {
        return Err(ReactionError::EmptyProduct);
    }
    let reactants = mapped_components(lhs)?;
    let products = mapped_components(rhs)?;
    let (product, product_maps) = products
        .into_iter()
        .min_by(|a, b| {
            b.0.heavy_atom_count()
                .cmp(&a.0.heavy_atom_count())
                .then_with(|| a.0.canonical_smiles().cmp(b.0.canonical_smiles()))
        })
        .ok_or(ReactionError::EmptyProduct)?;

    let mut by_number: HashMap<u32, (usize, usize)> = HashMap::new();
    for (ri, (_, maps)) in reactants.iter().enumerate() {
        for (ai, &n) in maps.iter().enumerate() {
            if n != 0 && by_number.insert(n, (ri, ai)).is_some() {
                return Err(ReactionError::DuplicateMapNumber(n));
            }
        }
    }
    let mut seen = HashSet::new();
    for &n in product_maps.iter().filter(|&&n| n != 0) {
        if !seen.insert(n) {
            return Err(ReactionError::DuplicateMapNumber(n));
        }
    }
    let product_to_reactant: Vec<Option<(usize, usize)>> = product_maps
        .iter()
        .map(|&n| (n != 0).then(|| by_number.get(&n).copied()).flatten())
        .collect();
    let atom_map = product_to_reactant
        .iter()
        .any(Option::is_some)
        .then_some(AtomMap {
            product_to_reactant,
        });

    Ok(Reaction {
        reactants: reactants.into_iter().map(|(m, _)| m).collect(),
        product,
        atom_map,
        source_id: source_id.to_string(),
    })
}

/// Deduplicated reactions with a product lookup.
#[derive(Debug, Clone, Default)]
pub struct ReactionDataset {
    pub reactions: Vec<Reaction>,
    /// Canonical product SMILES to reaction indices.
    pub index: BTreeMap<String, Vec<usize>>,
}

impl ReactionDataset {
    pub fn len(&self) -> usize {
        self.reactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reactions.is_empty()
    }

    pub fn producing(&self, product: &str) -> &[usize] {
        self.index.get(product).map_or(&[], Vec::as_slice)
    }

    pub fn mappable_count(&self) -> usize {
        self.reactions.iter().filter(|r| r.atom_map.is_some()).count()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.reactions {
            let record = ReactionRecord {
                id: r.source_id.clone(),
                reactants: r.reactant_key(),
                product: r.product.canonical_smiles().to_string(),
                mapped: r.mapped_text(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads records written by [`ReactionDataset::write_jsonl`] and
    /// re-applies deduplication.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<ReactionDataset, DatasetError> {
        let mut reactions = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ReactionRecord =
                serde_json::from_str(&line).map_err(|e| DatasetError::Record(n + 1, e.to_string()))?;
            let text = match &record.mapped {
                Some(m) => m.clone(),
                None => format!("{}>>{}", record.reactants.join("."), record.product),
            };
            let r = parse_reaction_smiles(&text, &record.id)
                .map_err(|e| DatasetError::Record(n + 1, e.to_string()))?;
            reactions.push(r);
        }
        Ok(deduplicate(reactions))
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {0}: {1}")]
    Record(usize, String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub id: String,
    pub reactants: Vec<String>,
    pub product: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapped: Option<String>,
}

/// Drops reactions whose product is one of their reactants and repeated
/// `(reactant set, product)` pairs, keeping the first occurrence.
pub fn deduplicate(reactions: Vec<Reaction>) -> ReactionDataset {
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for r in reactions {
        if r.product_in_reactants() || r.validate_map().is_err() {
            continue;
        }
        if seen.insert(r.key()) {
            kept.push(r);
        }
    }
    let mut index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in kept.iter().enumerate() {
        index
            .entry(r.product.canonical_smiles().to_string())
            .or_default()
            .push(i);
    }
    ReactionDataset {
        reactions: kept,
        index,
    }
}

/// Result of reading a raw reaction file.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub reactions: Vec<Reaction>,
    /// `(1-based line number, error message)` for every dropped line.
    pub dropped: Vec<(usize, String)>,
}

/// Parses one reaction per line; blank lines and `#` comments are skipped.
/// Only the first whitespace-separated field of a line is read.
pub fn ingest_lines<R: BufRead>(input: R) -> io::Result<IngestReport> {
    let mut report = IngestReport::default();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let smiles = text.split_whitespace().next().unwrap_or(text);
        match parse_reaction_smiles(smiles, &format!("L{}", n + 1)) {
            Ok(r) => report.reactions.push(r),
            Err(e) => report.dropped.push((n + 1, e.to_string())),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    #[test]
    fn esterification_transcribed() {
        let r = parse_reaction_smiles("CCO.CC(=O)O>>CCOC(C)=O", "x").unwrap();
        assert_eq!(r.reactants.len(), 2);
        assert!(r.reactants.contains(&parse_smiles("OCC").unwrap()));
        assert!(r.reactants.contains(&parse_smiles("OC(C)=O").unwrap()));
        assert_eq!(r.product, parse_smiles("CC(=O)OCC").unwrap());
        assert!(r.atom_map.is_none());
    }

    #[test]
    fn empty_sides_rejected() {
        assert!(matches!(
            parse_reaction_smiles("CCO>>", "x"),
            Err(ReactionError::EmptyProduct)
        ));
        assert!(matches!(
            parse_reaction_smiles(">>CCO", "x"),
            Err(ReactionError::EmptyReactants)
        ));
        assert!(matches!(
            parse_reaction_smiles("CCO>CCO", "x"),
            Err(ReactionError::Format(2))
        ));
        assert!(matches!(
            parse_reaction_smiles("C(C>>CC", "x"),
            Err(ReactionError::Parse(_))
        ));
    }

    #[test]
    fn keeps_largest_product() {
        let r = parse_reaction_smiles("CCCCBr.O>>CCCCO.Br", "x").unwrap();
        assert_eq!(r.product, parse_smiles("CCCCO").unwrap());
        // equal heavy atoms: smallest canonical SMILES
        let r = parse_reaction_smiles("C>>CO.CN", "x").unwrap();
        assert_eq!(r.product.canonical_smiles(), "CN");
    }

    #[test]
    fn reagents_dropped_and_maps_kept() {
        let r = parse_reaction_smiles(
            "[CH3:1][C:2](=[O:3])[OH:4].[NH2:5][CH3:6]>O>[CH3:1][C:2](=[O:3])[NH:5][CH3:6]",
            "x",
        )
        .unwrap();
        let map = r.atom_map.as_ref().unwrap();
        assert_eq!(map.mapped_count(), 5);
        r.validate_map().unwrap();
        let again = parse_reaction_smiles(&r.mapped_text().unwrap(), "y").unwrap();
        assert_eq!(again.key(), r.key());
        assert_eq!(again.atom_map.unwrap().mapped_count(), 5);
    }

    #[test]
    fn duplicate_map_numbers_rejected() {
        assert!(matches!(
            parse_reaction_smiles("[CH3:1][OH:1]>>[CH3:1]Cl", "x"),
            Err(ReactionError::DuplicateMapNumber(1))
        ));
    }

    #[test]
    fn dedup_rules() {
        let lines = ["CCO.CC(=O)O>>CCOC(C)=O", "OCC.OC(C)=O>>CCOC(C)=O", "CCO>>CCO"];
        let rs = lines
            .iter()
            .map(|l| parse_reaction_smiles(l, "x").unwrap())
            .collect();
        let ds = deduplicate(rs);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.producing("CCOC(C)=O"), &[0]);
    }

    #[test]
    fn dedup_is_idempotent_and_index_complete() {
        let lines = ["CC>>CCC", "CC>>CCC", "C>>CC", "CCC.O>>CCCO", "O.CCC>>CCCO", "C>>CCC"];
        let rs: Vec<Reaction> = lines
            .iter()
            .map(|l| parse_reaction_smiles(l, "x").unwrap())
            .collect();
        let once = deduplicate(rs);
        let twice = deduplicate(once.reactions.clone());
        assert_eq!(
            once.reactions.iter().map(Reaction::key).collect::<Vec<_>>(),
            twice.reactions.iter().map(Reaction::key).collect::<Vec<_>>()
        );
        for (i, r) in once.reactions.iter().enumerate() {
            assert!(once.producing(r.product.canonical_smiles()).contains(&i));
        }
        assert_eq!(once.len(), 4);
    }

    #[test]
    fn jsonl_round_trip() {
        let text = "# comment\nCCO.CC(=O)O>>CCOC(C)=O\n\n[CH3:1][CH2:2][OH:3]>>[CH3:1][CH2:2][Cl]\nC(C>>C\n";
        let report = ingest_lines(text.as_bytes()).unwrap();
        assert_eq!(report.reactions.len(), 2);
        assert_eq!(report.dropped.len(), 1);
        assert_eq!(report.dropped[0].0, 5);
        let ds = deduplicate(report.reactions);
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let back = ReactionDataset::read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.mappable_count(), 1);
        assert_eq!(back.reactions[1].key(), ds.reactions[1].key());
    }
}
