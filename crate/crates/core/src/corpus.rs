//! Synthetic reaction corpora with known ground truth.
//!
//! Reactions are produced by a handful of fixed rewrite rules applied
//! directly to molecular graphs, so every reaction comes with an exact atom
//! map and every target with the route that made it.
//!
//! A world is a rule set plus building blocks. Groups consumed by a two-body
//! rule are *reactive*; groups only a one-body rule touches are *latent*.
//! Every block and every generated molecule carries at most one of each. In
//! the orthogonal world the latent group of a linker unmasks to a group whose
//! partners differ from those of the linker's reactive group, so no reactant
//! set ever offers two ways to react, whatever order the steps come in.

use crate::chem::{parse_smiles, Atom, Bond, BondOrder, Element, Molecule};
use crate::network::StockSet;
use crate::reaction::{AtomMap, Reaction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// The rewrite rules the generator knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// acid + primary amine → amide
    Amide,
    /// acid + primary alcohol → ester
    Ester,
    /// alkyl bromide + primary alcohol → ether
    Ether,
    /// aldehyde + primary amine → secondary amine
    ReductiveAmination,
    /// alkyl bromide + primary amine → secondary amine
    Alkylation,
    /// aldehyde → primary alcohol
    AldehydeReduction,
    /// nitrile → primary amine
    NitrileReduction,
}

pub const ALL_RULES: [Rule; 7] = [
    Rule::Amide,
    Rule::Ester,
    Rule::Ether,
    Rule::ReductiveAmination,
    Rule::Alkylation,
    Rule::AldehydeReduction,
    Rule::NitrileReduction,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Group {
    Acid,
    Amine,
    Alcohol,
    Bromide,
    Aldehyde,
    Nitrile,
}

const ALL_GROUPS: [Group; 6] = [
    Group::Acid,
    Group::Amine,
    Group::Alcohol,
    Group::Bromide,
    Group::Aldehyde,
    Group::Nitrile,
];

impl Rule {
    /// Groups consumed, in reactant order.
    fn groups(self) -> &'static [Group] {
        match self {
            Rule::Amide => &[Group::Acid, Group::Amine],
            Rule::Ester => &[Group::Acid, Group::Alcohol],
            Rule::Ether => &[Group::Bromide, Group::Alcohol],
            Rule::ReductiveAmination => &[Group::Aldehyde, Group::Amine],
            Rule::Alkylation => &[Group::Bromide, Group::Amine],
            Rule::AldehydeReduction => &[Group::Aldehyde],
            Rule::NitrileReduction => &[Group::Nitrile],
        }
    }
}

// Building blocks with a single group.
const CAPS: &[&str] = &[
    "CC(=O)O",
    "CCC(=O)O",
    "CC(C)C(=O)O",
    "OC(=O)C1CCCCC1",
    "OC(=O)c1ccccc1",
    "OC(=O)Cc1ccccc1",
    "CN",
    "CCN",
    "CCCN",
    "CC(C)N",
    "NC1CCCCC1",
    "NCc1ccccc1",
    "CCO",
    "CCCO",
    "CC(C)CO",
    "OCC1CCCCC1",
    "OCc1ccccc1",
    "CCBr",
    "CCCBr",
    "BrCC1CCCC1",
    "BrCc1ccccc1",
    "CC=O",
    "CCC=O",
    "O=CC1CCCCC1",
    "O=Cc1ccccc1",
    "CC#N",
    "N#Cc1ccccc1",
];

// Linkers: a reactive group plus a latent one. In the orthogonal world the
// unmasked group neither reacts with the linker's reactive group nor shares
// a partner with it, so two linkers never pair up two ways and no partner
// has a choice of site. Only alcohol/amine pairs qualify: acids and amines
// react with each other, and a bromide shares acids as partners with
// amines (an acid's hydroxyl also reads as an alcohol) and reacts with
// alcohols.
const ORTHOGONAL_LINKERS: &[&str] = &[
    "N#CCCO",
    "N#CC1CCC(CO)CC1",
    "N#Cc1ccc(CO)cc1",
    "NCCCC=O",
    "NCc1ccc(C=O)cc1",
    "NC1CCC(C=O)CC1",
];

// Nitrile linkers for the full rule set, where aldehydes are reactive.
const FULL_LINKERS: &[&str] = &[
    "N#CCC(=O)O",
    "N#Cc1ccc(C(=O)O)cc1",
    "N#CCCN",
    "N#CC1CCC(N)CC1",
    "N#CCCO",
    "N#CC1CCC(CO)CC1",
    "N#CCCBr",
    "N#Cc1ccc(CBr)cc1",
];

/// Rules plus building blocks.
#[derive(Debug, Clone)]
pub struct World {
    pub rules: Vec<Rule>,
    caps: Vec<Molecule>,
    linkers: Vec<Molecule>,
}

impl World {
    /// Amide and ether formation with aldehyde and nitrile reduction as the
    /// unmasking steps; no reactant set can react two ways.
    pub fn orthogonal() -> World {
        World::new(
            vec![Rule::Amide, Rule::Ether, Rule::AldehydeReduction, Rule::NitrileReduction],
            ORTHOGONAL_LINKERS,
        )
    }

    /// All seven rules. Groups share partners here (an amine meets acids,
    /// aldehydes and bromides), so reordered routes can be ambiguous.
    pub fn full() -> World {
        World::new(ALL_RULES.to_vec(), FULL_LINKERS)
    }

    fn new(rules: Vec<Rule>, linkers: &[&str]) -> World {
        let mut w = World {
            rules,
            caps: Vec::new(),
            linkers: Vec::new(),
        };
        w.caps = blocks(CAPS)
            .into_iter()
            .filter(|m| w.profile(m).len() == 1)
            .collect();
        w.linkers = blocks(linkers);
        w
    }

    fn consumed_by(&self, g: Group, arity: usize) -> bool {
        self.rules
            .iter()
            .any(|r| r.groups().len() == arity && r.groups().contains(&g))
    }

    fn is_reactive(&self, g: Group) -> bool {
        self.consumed_by(g, 2)
    }

    /// Groups some rule of this world consumes, with multiplicity.
    fn profile(&self, m: &Molecule) -> Vec<Group> {
        let mut gs = Vec::new();
        for g in ALL_GROUPS {
            if self.consumed_by(g, 1) || self.consumed_by(g, 2) {
                for _ in sites(m, g) {
                    gs.push(g);
                }
            }
        }
        gs
    }

    /// At most one reactive and at most one latent group.
    fn is_clean(&self, m: &Molecule) -> bool {
        let gs = self.profile(m);
        let reactive = gs.iter().filter(|g| self.is_reactive(**g)).count();
        reactive <= 1 && gs.len() - reactive <= 1
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Molecule> {
        self.caps.iter().chain(&self.linkers)
    }
}

fn heavy_neighbors(m: &Molecule, a: usize) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
    m.neighbors(a).iter().copied()
}

fn is(m: &Molecule, a: usize, e: Element, h: u8) -> bool {
    let atom = m.atoms()[a];
    atom.element == e && atom.hydrogens == h && atom.charge == 0 && !atom.aromatic
}

/// Reactive sites of one group: the atoms a rule edits, in a fixed order.
fn sites(m: &Molecule, g: Group) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..m.atom_count() {
        let ns: Vec<(usize, BondOrder)> = heavy_neighbors(m, a).collect();
        match g {
            // [C](=O)[OH]: carbon, hydroxyl oxygen
            Group::Acid if is(m, a, Element::C, 0) => {
                let oh = ns
                    .iter()
                    .find(|&&(n, o)| o == BondOrder::Single && is(m, n, Element::O, 1));
                let carbonyl = ns
                    .iter()
                    .any(|&(n, o)| o == BondOrder::Double && is(m, n, Element::O, 0) && m.degree(n) == 1);
                if let (Some(&(oh, _)), true) = (oh, carbonyl) {
                    out.push(vec![a, oh]);
                }
            }
            Group::Amine if is(m, a, Element::N, 2) => {
                if ns.len() == 1 && ns[0].1 == BondOrder::Single && is(m, ns[0].0, Element::C, m.atoms()[ns[0].0].hydrogens) {
                    out.push(vec![a]);
                }
            }
            // hydroxyl on a CH2
            Group::Alcohol if is(m, a, Element::O, 1) => {
                if ns.len() == 1 && is(m, ns[0].0, Element::C, 2) {
                    out.push(vec![a]);
                }
            }
            // bromine on a CH2: carbon, bromine
            Group::Bromide if m.atoms()[a].element == Element::BR => {
                if ns.len() == 1 && is(m, ns[0].0, Element::C, 2) {
                    out.push(vec![ns[0].0, a]);
                }
            }
            // [CH]=O: carbon, oxygen
            Group::Aldehyde if is(m, a, Element::C, 1) => {
                if let Some(&(o, _)) = ns
                    .iter()
                    .find(|&&(n, o)| o == BondOrder::Double && is(m, n, Element::O, 0))
                {
                    out.push(vec![a, o]);
                }
            }
            // C#N: carbon, nitrogen
            Group::Nitrile if is(m, a, Element::C, 0) => {
                if let Some(&(n, _)) = ns
                    .iter()
                    .find(|&&(n, o)| o == BondOrder::Triple && is(m, n, Element::N, 0))
                {
                    out.push(vec![a, n]);
                }
            }
            _ => {}
        }
    }
    out
}

/// Editable union of reactant graphs with provenance.
struct Edit {
    atoms: Vec<Atom>,
    origin: Vec<(usize, usize)>,
    bonds: Vec<Bond>,
    removed: Vec<bool>,
    offsets: Vec<usize>,
}

impl Edit {
    fn new(reactants: &[&Molecule]) -> Edit {
        let mut e = Edit {
            atoms: Vec::new(),
            origin: Vec::new(),
            bonds: Vec::new(),
            removed: Vec::new(),
            offsets: Vec::new(),
        };
        for (ri, m) in reactants.iter().enumerate() {
            let off = e.atoms.len();
            e.offsets.push(off);
            for (ai, a) in m.atoms().iter().enumerate() {
                e.atoms.push(*a);
                e.origin.push((ri, ai));
                e.removed.push(false);
            }
            for b in m.bonds() {
                e.bonds.push(Bond {
                    begin: b.begin + off,
                    end: b.end + off,
                    order: b.order,
                });
            }
        }
        e
    }

    fn at(&self, reactant: usize, atom: usize) -> usize {
        self.offsets[reactant] + atom
    }

    fn remove(&mut self, a: usize) {
        self.removed[a] = true;
        self.bonds.retain(|b| b.begin != a && b.end != a);
    }

    fn set_bond(&mut self, a: usize, b: usize, order: BondOrder) {
        self.bonds.retain(|x| !((x.begin == a && x.end == b) || (x.begin == b && x.end == a)));
        self.bonds.push(Bond { begin: a, end: b, order });
    }

    fn set_h(&mut self, a: usize, h: u8) {
        self.atoms[a].hydrogens = h;
    }

    fn finish(self) -> (Molecule, AtomMap) {
        let mut position = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        let mut map = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if !self.removed[i] {
                position[i] = atoms.len();
                atoms.push(*a);
                map.push(Some(self.origin[i]));
            }
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                begin: position[b.begin],
                end: position[b.end],
                order: b.order,
            })
            .collect();
        let m = Molecule::new(atoms, bonds).expect("rule edits keep the graph valid");
        (m, AtomMap { product_to_reactant: map })
    }
}

/// Applies `rule` to reactants given in the rule's group order, at their
/// first sites. `None` when a reactant lacks the group or the product would
/// not be a single connected molecule.
pub fn apply_rule(rule: Rule, reactants: &[&Molecule]) -> Option<Reaction> {
    let groups = rule.groups();
    if reactants.len() != groups.len() {
        return None;
    }
    let mut picked = Vec::new();
    for (m, g) in reactants.iter().zip(groups) {
        picked.push(sites(m, *g).into_iter().next()?);
    }
    let mut e = Edit::new(reactants);
    let s = |e: &Edit, r: usize, k: usize| e.at(r, picked[r][k]);
    match rule {
        Rule::Amide | Rule::Ester => {
            let (c, oh, nu) = (s(&e, 0, 0), s(&e, 0, 1), s(&e, 1, 0));
            e.remove(oh);
            e.set_bond(c, nu, BondOrder::Single);
            let h = e.atoms[nu].hydrogens - 1;
            e.set_h(nu, h);
        }
        Rule::Ether | Rule::Alkylation => {
            let (c, br, nu) = (s(&e, 0, 0), s(&e, 0, 1), s(&e, 1, 0));
            e.remove(br);
            e.set_bond(c, nu, BondOrder::Single);
            let h = e.atoms[nu].hydrogens - 1;
            e.set_h(nu, h);
        }
        Rule::ReductiveAmination => {
            let (c, o, n) = (s(&e, 0, 0), s(&e, 0, 1), s(&e, 1, 0));
            e.remove(o);
            e.set_bond(c, n, BondOrder::Single);
            e.set_h(c, 2);
            e.set_h(n, 1);
        }
        Rule::AldehydeReduction => {
            let (c, o) = (s(&e, 0, 0), s(&e, 0, 1));
            e.set_bond(c, o, BondOrder::Single);
            e.set_h(c, 2);
            e.set_h(o, 1);
        }
        Rule::NitrileReduction => {
            let (c, n) = (s(&e, 0, 0), s(&e, 0, 1));
            e.set_bond(c, n, BondOrder::Single);
            e.set_h(c, 2);
            e.set_h(n, 2);
        }
    }
    let (product, map) = e.finish();
    if !product.is_connected() {
        return None;
    }
    Some(Reaction {
        reactants: reactants.iter().map(|m| (*m).clone()).collect(),
        product,
        atom_map: Some(map),
        source_id: String::new(),
    })
}

/// A generated corpus and its ground truth.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub reactions: Vec<Reaction>,
    /// Building blocks used as reactants (the leaves of the syntheses).
    pub stock: StockSet,
    /// Final molecule of every generated synthesis, sorted.
    pub targets: Vec<Molecule>,
    /// Rules that were used.
    pub rules: BTreeSet<Rule>,
}

fn blocks(list: &[&str]) -> Vec<Molecule> {
    list.iter()
        .map(|s| parse_smiles(s).expect("building blocks parse"))
        .collect()
}

struct Generator<'w> {
    rng: ChaCha8Rng,
    world: &'w World,
}

fn has(m: &Molecule, g: Group) -> bool {
    !sites(m, g).is_empty()
}

impl Generator<'_> {
    /// A partner carrying `g`: usually a building block, sometimes a
    /// freshly made amine (giving a convergent route).
    fn partner(&mut self, g: Group, rxns: &mut Vec<Reaction>) -> Option<Molecule> {
        if g == Group::Amine && self.rng.gen_bool(0.25) {
            if let Some(m) = self.made_amine(rxns) {
                return Some(m);
            }
        }
        let pool: Vec<&Molecule> = self.world.blocks().filter(|m| has(m, g)).collect();
        pool.choose(&mut self.rng).map(|m| (*m).clone())
    }

    /// A nitrile linker coupled to a cap and then reduced to an amine.
    fn made_amine(&mut self, rxns: &mut Vec<Reaction>) -> Option<Molecule> {
        let world = self.world;
        if !world.rules.contains(&Rule::NitrileReduction) {
            return None;
        }
        let linkers: Vec<&Molecule> = world.linkers.iter().filter(|m| has(m, Group::Nitrile)).collect();
        let linker = (*linkers.choose(&mut self.rng)?).clone();
        let g = *world.profile(&linker).iter().find(|g| world.is_reactive(**g))?;
        let (rule, linker_first) = self.rule_for(g)?;
        let other = rule.groups()[if linker_first { 1 } else { 0 }];
        let caps: Vec<&Molecule> = world.caps.iter().filter(|m| has(m, other)).collect();
        let cap = (*caps.choose(&mut self.rng)?).clone();
        let pair = if linker_first { [&linker, &cap] } else { [&cap, &linker] };
        let step = apply_rule(rule, &pair)?;
        let red = apply_rule(Rule::NitrileReduction, &[&step.product])?;
        if !world.is_clean(&step.product) || !world.is_clean(&red.product) {
            return None;
        }
        let amine = red.product.clone();
        rxns.push(step);
        rxns.push(red);
        Some(amine)
    }

    /// A two-body rule of the world consuming `g`, and whether `g` is its
    /// first group.
    fn rule_for(&mut self, g: Group) -> Option<(Rule, bool)> {
        let mut options = Vec::new();
        for &r in self.world.rules.iter().filter(|r| r.groups().len() == 2) {
            for (i, &x) in r.groups().iter().enumerate() {
                if x == g {
                    options.push((r, i == 0));
                }
            }
        }
        options.choose(&mut self.rng).copied()
    }

    /// The one-body rule of the world consuming `g`.
    fn unmasking(&self, g: Group) -> Option<Rule> {
        self.world
            .rules
            .iter()
            .copied()
            .find(|r| r.groups() == [g])
    }

    /// One synthesis of up to `max_steps` steps, grown forward from a
    /// building block.
    fn synthesis(&mut self, max_steps: usize) -> Option<(Molecule, Vec<Reaction>)> {
        let world = self.world;
        let all: Vec<&Molecule> = world.blocks().collect();
        let mut m = (*all.choose(&mut self.rng)?).clone();
        let mut rxns = Vec::new();
        let steps = self.rng.gen_range(1..=max_steps);
        for _ in 0..steps {
            let gs = world.profile(&m);
            let reactive = gs.iter().copied().find(|g| world.is_reactive(*g));
            let latent = gs.iter().copied().find(|g| !world.is_reactive(*g));
            let mut trial_rxns = Vec::new();
            let step = if let Some(g) = reactive {
                match self.unmasking(g) {
                    Some(rule) if self.rng.gen_bool(0.3) => apply_rule(rule, &[&m]),
                    _ => {
                        let (rule, first) = self.rule_for(g)?;
                        let other = rule.groups()[if first { 1 } else { 0 }];
                        let p = self.partner(other, &mut trial_rxns)?;
                        if first {
                            apply_rule(rule, &[&m, &p])
                        } else {
                            apply_rule(rule, &[&p, &m])
                        }
                    }
                }
            } else if let Some(g) = latent {
                apply_rule(self.unmasking(g)?, &[&m])
            } else {
                break;
            };
            let Some(step) = step else { break };
            if !world.is_clean(&step.product) || step.reactants.iter().any(|r| !world.is_clean(r)) {
                break;
            }
            m = step.product.clone();
            rxns.extend(trial_rxns);
            rxns.push(step);
        }
        (!rxns.is_empty()).then_some((m, rxns))
    }
}

fn finalize(mut reactions: Vec<Reaction>, targets: BTreeSet<Molecule>, blocks: &[Molecule]) -> Corpus {
    for (i, r) in reactions.iter_mut().enumerate() {
        r.source_id = format!("gen{i:05}");
    }
    let blocks: BTreeSet<&Molecule> = blocks.iter().collect();
    let mut stock = StockSet::new();
    for r in &reactions {
        for m in &r.reactants {
            if blocks.contains(m) {
                stock.insert(m);
            }
        }
    }
    let rules = BTreeSet::new();
    Corpus {
        reactions,
        stock,
        targets: targets.into_iter().collect(),
        rules,
    }
}

/// Corpus of exactly `n` distinct reactions in the orthogonal world, made
/// of whole syntheses of up to `max_steps` steps each.
pub fn closed_world(n: usize, max_steps: usize, seed: u64) -> Corpus {
    closed_world_in(&World::orthogonal(), n, max_steps, seed)
}

/// Corpus of exactly `n` distinct reactions in `world`.
pub fn closed_world_in(world: &World, n: usize, max_steps: usize, seed: u64) -> Corpus {
    let mut gen = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        world,
    };
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut reactions = Vec::new();
    let mut targets = BTreeSet::new();
    let mut rules = BTreeSet::new();
    let mut misses = 0;
    while reactions.len() < n {
        let room = n - reactions.len();
        let Some((target, rxns)) = gen.synthesis(max_steps.min(room).max(1)) else {
            continue;
        };
        let mut fresh = Vec::new();
        for r in rxns {
            let text = r.canonical_text();
            if !seen.contains(&text) && !fresh.iter().any(|f: &Reaction| f.canonical_text() == text) {
                fresh.push(r);
            }
        }
        if fresh.is_empty() || fresh.len() > room {
            misses += 1;
            assert!(misses < 100_000, "generator cannot fill the corpus");
            continue;
        }
        for r in &fresh {
            seen.insert(r.canonical_text());
            rules.insert(rule_of(world, r));
        }
        targets.insert(target);
        reactions.extend(fresh);
    }
    let all: Vec<Molecule> = world.blocks().cloned().collect();
    let mut c = finalize(reactions, targets, &all);
    c.rules = rules;
    c
}

/// Which rule of the world made a generated reaction.
fn rule_of(world: &World, r: &Reaction) -> Rule {
    world
        .rules
        .iter()
        .copied()
        .find(|&rule| {
            apply_rule(rule, &r.reactants.iter().collect::<Vec<_>>()).is_some_and(|x| x.product == r.product)
        })
        .expect("generated reactions come from a rule")
}

/// Single-step corpus planting four rules, five reactions each. Every
/// reaction of a rule shares the same atoms within one bond of the reaction
/// center, so each rule yields exactly one template at radius 1.
pub fn planted() -> Corpus {
    let pairs: [(Rule, &[&str], &[&str]); 4] = [
        (
            Rule::Amide,
            &["CC(=O)O", "CCC(=O)O", "CC(C)CC(=O)O", "OC(=O)CC1CCCCC1", "OC(=O)CCc1ccccc1"],
            &["CCN", "CCCN", "NCC1CCCCC1", "NCc1ccccc1", "CC(C)CN"],
        ),
        (
            Rule::Ester,
            &["CCCC(=O)O", "OC(=O)CC1CCCC1", "CC(C)(C)CC(=O)O", "OC(=O)CCCc1ccccc1", "CCCCC(=O)O"],
            &["CCO", "CCCO", "OCC1CCCCC1", "OCCc1ccccc1", "CC(C)CO"],
        ),
        (
            Rule::Ether,
            &["CCBr", "CCCBr", "BrCC1CCCC1", "BrCCc1ccccc1", "CC(C)CBr"],
            &["CCCCO", "OCC1CCCCC1", "CC(C)(C)CO", "OCCCc1ccccc1", "OCC1CCCC1"],
        ),
        (
            Rule::Alkylation,
            &["CCCCBr", "BrCC1CCCCC1", "CC(C)(C)CBr", "BrCCCc1ccccc1", "CCCCCBr"],
            &["CCCCN", "NCC1CCCC1", "CC(C)(C)CN", "NCCCc1ccccc1", "CCCCCN"],
        ),
    ];
    let mut reactions = Vec::new();
    let mut targets = BTreeSet::new();
    let mut rules = BTreeSet::new();
    let mut used = Vec::new();
    for (rule, left, right) in pairs {
        rules.insert(rule);
        let (left, right) = (blocks(left), blocks(right));
        for (a, b) in left.iter().zip(&right) {
            let r = apply_rule(rule, &[a, b]).expect("planted pairs react");
            targets.insert(r.product.clone());
            reactions.push(r);
        }
        used.extend(left);
        used.extend(right);
    }
    let mut c = finalize(reactions, targets, &used);
    c.rules = rules;
    c
}

/// Reaction SMILES lines for a random network over straight-chain alkanes
/// `C`, `CC`, ... (chemically meaningless; only the graph shape matters).
/// Reactions have one to three reactants and never list their product as
/// a reactant; duplicates are dropped.
pub fn random_network(molecules: usize, reactions: usize, seed: u64) -> Vec<String> {
    assert!(molecules >= 2, "a network needs at least two molecules");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=molecules).map(|n| "C".repeat(n)).collect();
    let mut seen = BTreeSet::new();
    let mut lines = Vec::new();
    for _ in 0..reactions {
        let product = rng.gen_range(0..molecules);
        let arity = rng.gen_range(1..=3.min(molecules - 1));
        let mut pool: Vec<usize> = (0..molecules).filter(|&i| i != product).collect();
        pool.shuffle(&mut rng);
        let mut rs: Vec<usize> = pool[..arity].to_vec();
        rs.sort_unstable();
        if seen.insert((rs.clone(), product)) {
            let lhs: Vec<&str> = rs.iter().map(|&i| names[i].as_str()).collect();
            lines.push(format!("{}>>{}", lhs.join("."), names[product]));
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn rules_make_the_expected_products() {
        let cases: [(Rule, &[&str], &str); 7] = [
            (Rule::Amide, &["CC(=O)O", "CCN"], "CCNC(C)=O"),
            (Rule::Ester, &["CC(=O)O", "CCO"], "CCOC(C)=O"),
            (Rule::Ether, &["CCBr", "CCO"], "CCOCC"),
            (Rule::ReductiveAmination, &["CC=O", "CCN"], "CCNCC"),
            (Rule::Alkylation, &["CCBr", "CN"], "CCNC"),
            (Rule::AldehydeReduction, &["CC=O"], "CCO"),
            (Rule::NitrileReduction, &["CC#N"], "CCN"),
        ];
        for (rule, rs, p) in cases {
            let ms: Vec<Molecule> = rs.iter().map(|s| m(s)).collect();
            let r = apply_rule(rule, &ms.iter().collect::<Vec<_>>()).unwrap();
            assert_eq!(r.product, m(p), "{rule:?}");
            r.validate_map().unwrap();
            // the written form re-parses to the same reaction
            let text = r.mapped_text().unwrap();
            let back = crate::reaction::parse_reaction_smiles(&text, "x").unwrap();
            assert_eq!(back.product, r.product);
        }
    }

    #[test]
    fn missing_group_is_refused() {
        assert!(apply_rule(Rule::Amide, &[&m("CCO"), &m("CCN")]).is_none());
        assert!(apply_rule(Rule::Amide, &[&m("CC(=O)O")]).is_none());
    }

    #[test]
    fn blocks_are_clean() {
        for w in [World::orthogonal(), World::full()] {
            for b in w.blocks() {
                assert!(w.is_clean(b), "{b}");
                assert!(!w.profile(b).is_empty(), "{b}");
            }
            for l in &w.linkers {
                assert_eq!(w.profile(l).len(), 2, "{l}");
            }
        }
    }

    #[test]
    fn orthogonal_linkers_unmask_to_a_different_partner_class() {
        let w = World::orthogonal();
        // an acid's hydroxyl matches a hydroxyl pattern too
        let reads_as = |g: Group| match g {
            Group::Acid => vec![Group::Acid, Group::Alcohol],
            g => vec![g],
        };
        let partners = |g: Group| -> BTreeSet<Group> {
            let mut out = BTreeSet::new();
            for r in w.rules.iter().filter(|r| r.groups().len() == 2) {
                let gs = r.groups();
                for (i, j) in [(0, 1), (1, 0)] {
                    if reads_as(g).contains(&gs[i]) {
                        out.insert(gs[j]);
                    }
                }
            }
            out
        };
        for l in &w.linkers {
            let gs = w.profile(l);
            let reactive = *gs.iter().find(|g| w.is_reactive(**g)).unwrap();
            let latent = *gs.iter().find(|g| !w.is_reactive(**g)).unwrap();
            let unmasked = apply_rule(w.rules.iter().copied().find(|r| r.groups() == [latent]).unwrap(), &[l])
                .unwrap()
                .product;
            let new = *w.profile(&unmasked).iter().find(|g| **g != reactive).unwrap();
            assert!(partners(reactive).is_disjoint(&partners(new)), "{l}");
            assert!(!partners(reactive).contains(&new), "{l}");
            assert!(!partners(new).contains(&reactive), "{l}");
        }
    }

    #[test]
    fn closed_world_shape() {
        let c = closed_world(200, 6, 11);
        assert_eq!(c.reactions.len(), 200);
        let texts: BTreeSet<String> = c.reactions.iter().map(|r| r.canonical_text()).collect();
        assert_eq!(texts.len(), 200);
        assert!(c.rules.len() <= 10);
        let w = World::orthogonal();
        assert!(c.reactions.iter().all(|r| r.validate_map().is_ok() && w.is_clean(&r.product)));
        let again = closed_world(200, 6, 11);
        assert_eq!(
            again.reactions.iter().map(|r| r.canonical_text()).collect::<Vec<_>>(),
            c.reactions.iter().map(|r| r.canonical_text()).collect::<Vec<_>>()
        );
        assert!(c.reactions.iter().any(|r| r.reactants.iter().any(|x| !c.stock.contains(x))));
    }

    #[test]
    fn planted_corpus() {
        let c = planted();
        assert_eq!(c.reactions.len(), 20);
        assert_eq!(c.rules.len(), 4);
    }

    #[test]
    fn random_network_lines() {
        let lines = random_network(8, 30, 3);
        assert!(!lines.is_empty() && lines.len() <= 30);
        for l in &lines {
            let r = crate::reaction::parse_reaction_smiles(l, "x").unwrap();
            assert!(!r.product_in_reactants());
        }
    }
}
