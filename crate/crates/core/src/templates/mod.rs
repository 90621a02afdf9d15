//! Template-based single-step models.
//!
//! A template is a graph-rewrite rule: a left-hand side of patterns to match
//! and a right-hand side to put in their place, tied together by
//! correspondence labels. Retro templates match a product and produce
//! reactant sets; forward templates are the same rules reversed.
//!
//! Candidates are ranked by how often their rule was seen during extraction
//! (template support) rather than by a learned model.

mod apply;
mod extract;
mod matcher;
mod pattern;

pub use extract::{
    detect_reaction_center, extract_from_reactions, extract_template, extract_templates, Extraction,
};
pub use matcher::embeddings;
pub use pattern::Pattern;

use crate::chem::canon::{canonical_ranks, ColoredGraph};
use crate::chem::{Molecule, ParseError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, BufRead, Write};
use thiserror::Error;

/// Embeddings tried per template and host.
const EMBEDDING_LIMIT: usize = 64;
/// Forward applications tried per template before giving up on it.
const FORWARD_TRIALS: usize = 256;
/// Forward templates with more reactant patterns than this are not tried.
const MAX_FORWARD_REACTANTS: usize = 6;

#[derive(Debug, Clone, Error)]
pub enum TemplateError {
    #[error("reaction has no atom map")]
    Unmapped,
    #[error("reaction has no mapped atoms")]
    NoMappedAtoms,
    #[error("atom map is not injective or references a missing atom")]
    BadAtomMap,
    #[error("reaction center is empty")]
    EmptyCenter,
    #[error("no forward rule")]
    NoForwardRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Retro,
    Forward,
}

impl Direction {
    fn prefix(self) -> char {
        match self {
            Direction::Retro => 'R',
            Direction::Forward => 'F',
        }
    }
}

/// A rewrite rule. For retro templates `lhs` is the single product pattern
/// and `rhs` the reactant patterns; forward templates swap the two.
#[derive(Debug, Clone)]
pub struct Template {
    pub id: String,
    pub direction: Direction,
    pub lhs: Vec<Pattern>,
    pub rhs: Vec<Pattern>,
    pub radius: u32,
    pub support: u32,
    text: String,
    /// `(element, aromatic)` counts the left-hand side needs, for prefiltering.
    needs: Vec<((u8, bool), usize)>,
}

impl Template {
    /// Builds a template in canonical form: patterns are reordered and
    /// labels renumbered so isomorphic rules get identical text.
    pub fn new(
        direction: Direction,
        lhs: Vec<Pattern>,
        rhs: Vec<Pattern>,
        radius: u32,
        support: u32,
    ) -> Template {
        let text = canonical_text(&lhs, &rhs);
        Template::from_text(direction, &text, radius, support)
            .expect("canonical template text parses")
    }

    /// Parses `lhs>>rhs` pattern text. The text is trusted to be canonical.
    pub fn from_text(
        direction: Direction,
        text: &str,
        radius: u32,
        support: u32,
    ) -> Result<Template, ParseError> {
        let (l, r) = text.split_once(">>").ok_or(ParseError {
            position: 0,
            kind: crate::chem::ParseErrorKind::UnexpectedCharacter,
        })?;
        let side = |s: &str| {
            pattern::split_side(s)
                .into_iter()
                .map(Pattern::parse)
                .collect::<Result<Vec<_>, _>>()
        };
        let lhs = side(l)?;
        let rhs = side(r)?;
        let mut counts: BTreeMap<(u8, bool), usize> = BTreeMap::new();
        for p in &lhs {
            for a in p.graph.atoms() {
                *counts.entry((a.element.atomic_number(), a.aromatic)).or_default() += 1;
            }
        }
        Ok(Template {
            id: String::new(),
            direction,
            lhs,
            rhs,
            radius,
            support,
            text: text.to_string(),
            needs: counts.into_iter().collect(),
        })
    }

    /// Canonical `lhs>>rhs` text; equal exactly for isomorphic templates.
    pub fn text(&self) -> &str {
        &self.text
    }

    /// The same rule in the opposite direction.
    pub fn reversed(&self) -> Template {
        let (l, r) = self.text.split_once(">>").expect("template text has two sides");
        let direction = match self.direction {
            Direction::Retro => Direction::Forward,
            Direction::Forward => Direction::Retro,
        };
        Template::from_text(direction, &format!("{r}>>{l}"), self.radius, self.support)
            .expect("reversed template text parses")
    }

    pub fn product_patterns(&self) -> &[Pattern] {
        match self.direction {
            Direction::Retro => &self.lhs,
            Direction::Forward => &self.rhs,
        }
    }

    pub fn reactant_patterns(&self) -> &[Pattern] {
        match self.direction {
            Direction::Retro => &self.rhs,
            Direction::Forward => &self.lhs,
        }
    }

    fn may_match(&self, available: &HashMap<(u8, bool), usize>) -> bool {
        self.needs
            .iter()
            .all(|(k, n)| available.get(k).is_some_and(|have| have >= n))
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn element_counts<'a>(ms: impl IntoIterator<Item = &'a Molecule>) -> HashMap<(u8, bool), usize> {
    let mut counts = HashMap::new();
    for m in ms {
        for a in m.atoms() {
            *counts.entry((a.element.atomic_number(), a.aromatic)).or_default() += 1;
        }
    }
    counts
}

/// Canonical text of a rule. Both sides, their pattern groupings and the
/// correspondence links are encoded in one colored graph whose canonical
/// labeling orders the patterns and numbers the labels.
fn canonical_text(lhs: &[Pattern], rhs: &[Pattern]) -> String {
    const BOND: u8 = 0;
    const CORRESPONDS: u8 = 8;
    const MEMBER: u8 = 9;
    let mut invariants = Vec::new();
    let mut adjacency: Vec<Vec<(usize, u8)>> = Vec::new();
    let mut starts = [Vec::new(), Vec::new()];
    for (side, pats) in [lhs, rhs].into_iter().enumerate() {
        for p in pats {
            starts[side].push(invariants.len());
            for (i, a) in p.graph.atoms().iter().enumerate() {
                let h = p.hydrogens[i].map_or(0, |h| h as u64 + 1);
                invariants.push(
                    (side as u64) << 56
                        | (a.element.atomic_number() as u64) << 40
                        | ((a.charge as i64 + 64) as u64) << 32
                        | (a.aromatic as u64) << 24
                        | h << 16
                        | ((p.labels[i] != 0) as u64) << 8,
                );
                adjacency.push(Vec::new());
            }
        }
    }
    let link = |adj: &mut Vec<Vec<(usize, u8)>>, a: usize, b: usize, label: u8| {
        adj[a].push((b, label));
        adj[b].push((a, label));
    };
    for (side, pats) in [lhs, rhs].into_iter().enumerate() {
        for (k, p) in pats.iter().enumerate() {
            let off = starts[side][k];
            for b in p.graph.bonds() {
                link(&mut adjacency, off + b.begin, off + b.end, BOND + b.order.code());
            }
        }
    }
    let mut by_label: HashMap<u32, usize> = HashMap::new();
    for (k, p) in lhs.iter().enumerate() {
        for (i, &l) in p.labels.iter().enumerate() {
            if l != 0 {
                by_label.insert(l, starts[0][k] + i);
            }
        }
    }
    for (k, p) in rhs.iter().enumerate() {
        for (i, &l) in p.labels.iter().enumerate() {
            if let Some(&v) = by_label.get(&l) {
                link(&mut adjacency, v, starts[1][k] + i, CORRESPONDS);
            }
        }
    }
    let mut groups = [Vec::new(), Vec::new()];
    for (side, pats) in [lhs, rhs].into_iter().enumerate() {
        for (k, p) in pats.iter().enumerate() {
            let g = invariants.len();
            invariants.push((2 + side as u64) << 56);
            adjacency.push(Vec::new());
            for i in 0..p.atom_count() {
                link(&mut adjacency, g, starts[side][k] + i, MEMBER);
            }
            groups[side].push(g);
        }
    }

    let ranks = canonical_ranks(&ColoredGraph {
        invariants,
        adjacency,
    });

    // renumber labels in canonical order of the left-hand atoms
    let mut labeled: Vec<(u32, u32)> = Vec::new();
    for (k, p) in lhs.iter().enumerate() {
        for (i, &l) in p.labels.iter().enumerate() {
            if l != 0 {
                labeled.push((ranks[starts[0][k] + i], l));
            }
        }
    }
    labeled.sort_unstable();
    let renumber: HashMap<u32, u32> = labeled
        .iter()
        .enumerate()
        .map(|(n, &(_, l))| (l, n as u32 + 1))
        .collect();

    let write_side = |side: usize, pats: &[Pattern]| -> String {
        let mut order: Vec<usize> = (0..pats.len()).collect();
        order.sort_by_key(|&k| ranks[groups[side][k]]);
        order
            .into_iter()
            .map(|k| {
                let p = &pats[k];
                let relabeled = Pattern {
                    graph: p.graph.clone(),
                    hydrogens: p.hydrogens.clone(),
                    labels: p
                        .labels
                        .iter()
                        .map(|l| renumber.get(l).copied().unwrap_or(0))
                        .collect(),
                };
                let local: Vec<u32> = (0..p.atom_count()).map(|i| ranks[starts[side][k] + i]).collect();
                relabeled.write(&local)
            })
            .collect::<Vec<_>>()
            .join(".")
    };
    format!("{}>>{}", write_side(0, lhs), write_side(1, rhs))
}

/// One ranked single-step outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Sorted by canonical SMILES, without repeats.
    pub molecules: Vec<Molecule>,
    pub score: f64,
    pub template_id: String,
}

impl Prediction {
    /// Canonical SMILES of the molecules joined with '.'.
    pub fn key(&self) -> String {
        join_key(&self.molecules)
    }
}

fn join_key(ms: &[Molecule]) -> String {
    ms.iter()
        .map(|m| m.canonical_smiles())
        .collect::<Vec<_>>()
        .join(".")
}

/// Templates of one direction, ordered by support (descending) and text.
#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    direction: Direction,
    templates: Vec<Template>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub id: String,
    pub direction: Direction,
    pub pattern: String,
    pub radius: u32,
    pub support: u32,
}

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: bad pattern: {source}")]
    Pattern { line: usize, source: ParseError },
    #[error("line {line}: expected a {expected:?} template")]
    Direction { line: usize, expected: Direction },
}

impl TemplateLibrary {
    /// Sorts the templates and assigns ids (`R00000`, `F00000`, ...).
    pub fn new(direction: Direction, mut templates: Vec<Template>) -> TemplateLibrary {
        templates.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.text.cmp(&b.text)));
        for (i, t) in templates.iter_mut().enumerate() {
            assert_eq!(t.direction, direction, "template direction mismatch");
            t.id = format!("{}{i:05}", direction.prefix());
        }
        TemplateLibrary {
            direction,
            templates,
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn total_support(&self) -> u64 {
        self.templates.iter().map(|t| t.support as u64).sum()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for t in &self.templates {
            let rec = TemplateRecord {
                id: t.id.clone(),
                direction: t.direction,
                pattern: t.text.clone(),
                radius: t.radius,
                support: t.support,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(
        direction: Direction,
        input: R,
    ) -> Result<TemplateLibrary, LibraryError> {
        let mut templates = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TemplateRecord = serde_json::from_str(&line)
                .map_err(|source| LibraryError::Json { line: i + 1, source })?;
            if rec.direction != direction {
                return Err(LibraryError::Direction {
                    line: i + 1,
                    expected: direction,
                });
            }
            let t = Template::from_text(direction, &rec.pattern, rec.radius, rec.support)
                .map_err(|source| LibraryError::Pattern { line: i + 1, source })?;
            templates.push(t);
        }
        Ok(TemplateLibrary::new(direction, templates))
    }
}

/// Distinct reactant sets one retro template yields on `product`. A set
/// lists each molecule once, even when the template uses two copies of it.
fn retro_outcomes(t: &Template, product: &Molecule) -> Vec<Vec<Molecule>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for e in embeddings(&t.lhs[0], product, EMBEDDING_LIMIT) {
        let Some(mut ms) = apply::rewrite(&t.lhs, &t.rhs, &[product], &[e], false) else {
            continue;
        };
        if ms.iter().any(|m| m == product) {
            continue;
        }
        ms.sort();
        ms.dedup();
        if seen.insert(join_key(&ms)) {
            out.push(ms);
        }
    }
    out
}

/// Up to `k` reactant sets for `product`, best first.
///
/// Every template whose product pattern matches is applied at every
/// embedding. A template's share of the score is its support over the total
/// support of the templates that produced anything, split evenly between its
/// distinct outcomes; an outcome reached by several templates keeps its best
/// score. Ties are broken by the joined canonical SMILES.
pub fn predict_retro_topk(product: &Molecule, k: usize, lib: &TemplateLibrary) -> Vec<Prediction> {
    assert_eq!(lib.direction, Direction::Retro, "retro prediction needs a retro library");
    assert!(k >= 1, "k must be at least 1");
    let available = element_counts([product]);
    let mut matched: Vec<(&Template, Vec<Vec<Molecule>>)> = Vec::new();
    for t in &lib.templates {
        if t.lhs.len() != 1 || !t.may_match(&available) {
            continue;
        }
        let outcomes = retro_outcomes(t, product);
        if !outcomes.is_empty() {
            matched.push((t, outcomes));
        }
    }
    let total: u64 = matched.iter().map(|(t, _)| t.support as u64).sum();
    let mut best: BTreeMap<String, Prediction> = BTreeMap::new();
    for (t, outcomes) in matched {
        let score = t.support as f64 / total as f64 / outcomes.len() as f64;
        for ms in outcomes {
            let key = join_key(&ms);
            match best.get_mut(&key) {
                Some(p) if p.score >= score => {}
                Some(p) => {
                    p.score = score;
                    p.template_id = t.id.clone();
                }
                None => {
                    best.insert(
                        key,
                        Prediction {
                            molecules: ms,
                            score,
                            template_id: t.id.clone(),
                        },
                    );
                }
            }
        }
    }
    let mut ranked: Vec<Prediction> = best.into_values().collect();
    // stable sort over key-ordered input breaks score ties lexicographically
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    ranked.truncate(k);
    ranked
}

/// Every way to give each of `patterns` reactant patterns one of `hosts`
/// reactants so that every reactant is used, in lexicographic order. With
/// equal counts these are the permutations; with more patterns than
/// reactants some reactant fills several patterns (as separate molecules).
fn assignments(patterns: usize, hosts: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, uses: &mut [usize], patterns: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == patterns {
            if uses.iter().all(|&u| u > 0) {
                out.push(cur.clone());
            }
            return;
        }
        let unused = uses.iter().filter(|&&u| u == 0).count();
        if patterns - cur.len() < unused {
            return;
        }
        for h in 0..uses.len() {
            uses[h] += 1;
            cur.push(h);
            go(cur, uses, patterns, out);
            cur.pop();
            uses[h] -= 1;
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![0; hosts], patterns, &mut out);
    out
}

/// Product of the first valid application of a forward template, trying
/// reactant assignments and embeddings in canonical order.
fn first_forward_product(t: &Template, hosts: &[&Molecule]) -> Option<Molecule> {
    let mut trials = 0;
    for perm in assignments(t.lhs.len(), hosts.len()) {
        let assigned: Vec<&Molecule> = perm.iter().map(|&i| hosts[i]).collect();
        let per_pattern: Vec<Vec<Vec<usize>>> = t
            .lhs
            .iter()
            .zip(&assigned)
            .map(|(p, h)| embeddings(p, h, EMBEDDING_LIMIT))
            .collect();
        if per_pattern.iter().any(Vec::is_empty) {
            continue;
        }
        // odometer over the cartesian product, last pattern fastest
        let mut idx = vec![0usize; per_pattern.len()];
        'combos: loop {
            trials += 1;
            if trials > FORWARD_TRIALS {
                return None;
            }
            let choice: Vec<Vec<usize>> = idx
                .iter()
                .zip(&per_pattern)
                .map(|(&i, es)| es[i].clone())
                .collect();
            if let Some(mut out) = apply::rewrite(&t.lhs, &t.rhs, &assigned, &choice, true) {
                let product = out.swap_remove(0);
                if !hosts.contains(&&product) {
                    return Some(product);
                }
            }
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break 'combos;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < per_pattern[pos].len() {
                    continue 'combos;
                }
                idx[pos] = 0;
            }
        }
    }
    None
}

/// The single most likely product of `reactants`.
///
/// Reactants form a set: each distinct molecule must be used, and one
/// molecule may fill several reactant patterns of a template (a molecule
/// reacting with a copy of itself). The highest-support template that
/// applies wins, at its first canonical-order embedding; equal-support
/// winners are decided by the smallest canonical product SMILES. The score is the winner's support over the total support
/// of all templates that applied.
pub fn predict_forward(
    reactants: &[Molecule],
    lib: &TemplateLibrary,
) -> Result<Prediction, TemplateError> {
    assert_eq!(lib.direction, Direction::Forward, "forward prediction needs a forward library");
    let mut hosts: Vec<&Molecule> = reactants.iter().collect();
    hosts.sort();
    hosts.dedup();
    if hosts.is_empty() || hosts.len() > MAX_FORWARD_REACTANTS {
        return Err(TemplateError::NoForwardRule);
    }
    let available = element_counts(hosts.iter().copied());
    let mut applied: Vec<(&Template, Molecule)> = Vec::new();
    for t in &lib.templates {
        if t.lhs.len() < hosts.len() || (t.lhs.len() == hosts.len() && !t.may_match(&available)) {
            continue;
        }
        if let Some(p) = first_forward_product(t, &hosts) {
            applied.push((t, p));
        }
    }
    let total: u64 = applied.iter().map(|(t, _)| t.support as u64).sum();
    let (t, product) = applied
        .into_iter()
        .min_by(|(ta, pa), (tb, pb)| tb.support.cmp(&ta.support).then_with(|| pa.cmp(pb)))
        .ok_or(TemplateError::NoForwardRule)?;
    Ok(Prediction {
        molecules: vec![product],
        score: t.support as f64 / total as f64,
        template_id: t.id.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use crate::reaction::{deduplicate, parse_reaction_smiles};

    const ESTER: &str = "[CH3:1][CH2:2][OH:3].[CH3:4][C:5](=[O:6])[OH:7]>>[CH3:1][CH2:2][O:3][C:5]([CH3:4])=[O:6]";
    const AMIDE: &str = "[CH3:1][NH2:2].[Cl:9][C:3](=[O:4])[CH3:5]>>[CH3:1][NH:2][C:3](=[O:4])[CH3:5]";

    fn smiles(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    fn libraries(lines: &[&str]) -> Extraction {
        let rs = lines
            .iter()
            .enumerate()
            .map(|(i, l)| parse_reaction_smiles(l, &i.to_string()).unwrap())
            .collect();
        extract_templates(&deduplicate(rs), 1)
    }

    #[test]
    fn text_is_invariant_to_input_order() {
        let a = "[CH3:1][CH2:2][OH:3].[CH3:4][C:5](=[O:6])[OH:7]>>[CH3:1][CH2:2][O:3][C:5]([CH3:4])=[O:6]";
        let b = "[OH:7][C:5](=[O:6])[CH3:4].[OH:3][CH2:2][CH3:1]>>[O:6]=[C:5]([CH3:4])[O:3][CH2:2][CH3:1]";
        let ta = extract_template(&parse_reaction_smiles(a, "a").unwrap(), 1).unwrap();
        let tb = extract_template(&parse_reaction_smiles(b, "b").unwrap(), 1).unwrap();
        assert_eq!(ta.text(), tb.text());
        let again = Template::from_text(Direction::Retro, ta.text(), 1, 1).unwrap();
        assert_eq!(canonical_text(&again.lhs, &again.rhs), ta.text());
    }

    #[test]
    fn copies_merge_support() {
        // a cleaned dataset keeps one copy of repeated lines
        let ex = libraries(&[ESTER, ESTER, ESTER]);
        assert_eq!(ex.retro.len(), 1);
        assert_eq!(ex.retro.templates()[0].support, 1);
        let rs: Vec<_> = (0..3)
            .map(|i| parse_reaction_smiles(ESTER, &i.to_string()).unwrap())
            .collect();
        let ex = extract_from_reactions(&rs, 1);
        assert_eq!(ex.retro.len(), 1);
        assert_eq!(ex.retro.templates()[0].support, 3);
        // homologs with the same local environment share one rule
        let ex = libraries(&[
            ESTER,
            "[CH3:8][CH2:1][CH2:2][OH:3].[CH3:4][C:5](=[O:6])[OH:7]>>[CH3:8][CH2:1][CH2:2][O:3][C:5]([CH3:4])=[O:6]",
            "[CH3:1][CH2:2][OH:3].[CH3:8][CH2:4][C:5](=[O:6])[OH:7]>>[CH3:1][CH2:2][O:3][C:5]([CH2:4][CH3:8])=[O:6]",
        ]);
        assert_eq!(ex.retro.len(), 1);
        assert_eq!(ex.retro.templates()[0].support, 3);
    }

    #[test]
    fn retro_recovers_reactants() {
        let ex = libraries(&[ESTER]);
        let preds = predict_retro_topk(&smiles("CCOC(C)=O"), 10, &ex.retro);
        assert_eq!(preds.len(), 1);
        assert_eq!(preds[0].key(), "CC(=O)O.CCO");
        assert_eq!(preds[0].score, 1.0);
        // a homolog matches the same rule
        let preds = predict_retro_topk(&smiles("CCOC(=O)CC"), 10, &ex.retro);
        assert_eq!(preds[0].key(), "CCC(=O)O.CCO");
    }

    #[test]
    fn forward_replays() {
        let ex = libraries(&[ESTER, AMIDE]);
        let p = predict_forward(&[smiles("CCO"), smiles("CC(=O)O")], &ex.forward).unwrap();
        assert_eq!(p.molecules[0], smiles("CCOC(C)=O"));
        let p = predict_forward(&[smiles("CC(=O)Cl"), smiles("CN")], &ex.forward).unwrap();
        assert_eq!(p.molecules[0], smiles("CNC(C)=O"));
    }

    #[test]
    fn no_match_is_empty_or_error() {
        let ex = libraries(&[ESTER]);
        assert!(predict_retro_topk(&smiles("c1ccccc1"), 5, &ex.retro).is_empty());
        assert!(matches!(
            predict_forward(&[smiles("c1ccccc1")], &ex.forward),
            Err(TemplateError::NoForwardRule)
        ));
        let empty = TemplateLibrary::new(Direction::Forward, Vec::new());
        assert!(predict_forward(&[smiles("CCO"), smiles("CC(=O)O")], &empty).is_err());
    }

    #[test]
    fn scores_follow_support() {
        // two rules that both disconnect an ester-like product: support 3 vs 1
        let methyl = "[CH3:1][OH:3].[CH3:4][C:5](=[O:6])[OH:7]>>[CH3:1][O:3][C:5]([CH3:4])=[O:6]";
        let chloride = "[CH3:1][OH:3].[CH3:4][C:5](=[O:6])[Cl:7]>>[CH3:1][O:3][C:5]([CH3:4])=[O:6]";
        let rs: Vec<_> = [methyl, methyl, methyl, chloride]
            .iter()
            .enumerate()
            .map(|(i, l)| parse_reaction_smiles(l, &i.to_string()).unwrap())
            .collect();
        let ex = extract_from_reactions(&rs, 1);
        assert_eq!(ex.retro.len(), 2);
        let preds = predict_retro_topk(&smiles("COC(C)=O"), 10, &ex.retro);
        let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
        assert_eq!(scores, vec![0.75, 0.25]);
        assert_eq!(preds[0].key(), "CC(=O)O.CO");
        // forward: both rules need two reactants, the acid one wins on support
        let p = predict_forward(&[smiles("CO"), smiles("CC(=O)O")], &ex.forward).unwrap();
        assert_eq!(p.molecules[0], smiles("COC(C)=O"));
    }

    #[test]
    fn library_jsonl_round_trip() {
        let ex = libraries(&[ESTER, AMIDE]);
        let mut buf = Vec::new();
        ex.retro.write_jsonl(&mut buf).unwrap();
        let back = TemplateLibrary::read_jsonl(Direction::Retro, &buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.templates().iter().zip(ex.retro.templates()) {
            assert_eq!((a.id.as_str(), a.text(), a.support), (b.id.as_str(), b.text(), b.support));
        }
        assert!(TemplateLibrary::read_jsonl(Direction::Forward, &buf[..]).is_err());
    }

    #[test]
    fn reversed_twice_is_identity() {
        let ex = libraries(&[AMIDE]);
        let t = &ex.retro.templates()[0];
        assert_eq!(t.reversed().reversed().text(), t.text());
        assert_eq!(t.reversed().direction, Direction::Forward);
    }
}
