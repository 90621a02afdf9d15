//! Beam-search retrosynthetic planner.
//!
//! A search state is a partial route: the steps chosen so far, the molecules
//! still to be made (not in stock), and the summed log score of its steps.
//! Each round expands one open molecule of every state in the beam (the
//! largest by heavy-atom count, ties by SMILES) with the retro model. Children
//! with nothing left open go to the finished list without taking a beam slot;
//! the best `beam_width` of the rest form the next beam. The search stops once
//! `beam_width` routes are finished, the beam empties, or the call budget runs
//! out.

use crate::chem::Molecule;
use crate::network::{RouteStep, StockSet, SyntheticRoute, DEFAULT_MAX_DEPTH};
use crate::templates::{predict_retro_topk, Prediction, TemplateLibrary};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub const DEFAULT_BEAM_WIDTH: usize = 5;
pub const DEFAULT_CALL_BUDGET: usize = 500;

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub beam_width: usize,
    pub max_depth: usize,
    pub call_budget: usize,
    pub stock: StockSet,
}

impl PlannerConfig {
    pub fn new(stock: StockSet) -> PlannerConfig {
        PlannerConfig {
            beam_width: DEFAULT_BEAM_WIDTH,
            max_depth: DEFAULT_MAX_DEPTH,
            call_budget: DEFAULT_CALL_BUDGET,
            stock,
        }
    }
}

/// What a planning run cost.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanTrace {
    /// Retro-model invocations (repeat queries within a run are served from
    /// a cache and not counted).
    pub retro_calls: usize,
    /// Search rounds performed.
    pub rounds: usize,
    pub budget_exhausted: bool,
}

/// Number of retro-model invocations recorded in `trace`.
pub fn count_calls(trace: &PlanTrace) -> usize {
    trace.retro_calls
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    /// Finished routes, best confidence first.
    pub routes: Vec<SyntheticRoute>,
    pub trace: PlanTrace,
}

#[derive(Debug, Clone)]
struct State {
    /// Molecules still to be made, with their depth below the target.
    open: BTreeMap<Molecule, usize>,
    /// Molecules on the way from the target to each open molecule.
    ancestors: BTreeMap<Molecule, BTreeSet<Molecule>>,
    steps: Vec<RouteStep>,
    made: BTreeSet<Molecule>,
    score: f64,
    key: String,
}

impl State {
    fn root(target: &Molecule) -> State {
        State {
            open: BTreeMap::from([(target.clone(), 0)]),
            ancestors: BTreeMap::from([(target.clone(), BTreeSet::new())]),
            steps: Vec::new(),
            made: BTreeSet::new(),
            score: 0.0,
            key: String::new(),
        }
    }

    /// The open molecule to expand next: most heavy atoms, then smallest
    /// SMILES.
    fn next_open(&self) -> &Molecule {
        self.open
            .keys()
            .min_by(|a, b| {
                b.heavy_atom_count()
                    .cmp(&a.heavy_atom_count())
                    .then_with(|| a.cmp(b))
            })
            .expect("open states have an open molecule")
    }

    fn child(&self, m: &Molecule, p: &Prediction, cfg: &PlannerConfig) -> Option<State> {
        let depth = self.open[m];
        let mut path = self.ancestors[m].clone();
        path.insert(m.clone());
        if p.molecules.iter().any(|r| path.contains(r)) {
            return None;
        }
        let mut next = self.clone();
        next.open.remove(m);
        next.ancestors.remove(m);
        for r in &p.molecules {
            if cfg.stock.contains(r) || next.made.contains(r) {
                continue;
            }
            let d = depth + 1;
            if d >= cfg.max_depth {
                // r would need a step beyond the depth limit
                return None;
            }
            let slot = next.open.entry(r.clone()).or_insert(d);
            *slot = (*slot).max(d);
            next.ancestors.entry(r.clone()).or_default().extend(path.iter().cloned());
        }
        next.made.insert(m.clone());
        next.steps.push(RouteStep::new(m.clone(), p.molecules.clone()));
        next.score += p.score.ln();
        let mut texts: Vec<String> = next
            .steps
            .iter()
            .map(|s| {
                let rs: Vec<&str> = s.reactants.iter().map(|r| r.canonical_smiles()).collect();
                format!("{}>>{}", rs.join("."), s.product)
            })
            .collect();
        texts.sort();
        next.key = texts.join(";");
        Some(next)
    }
}

/// Plans up to `cfg.beam_width` routes from `target` to stock molecules.
pub fn plan(target: &Molecule, cfg: &PlannerConfig, lib: &TemplateLibrary) -> PlanResult {
    assert!(cfg.beam_width >= 1, "beam width must be positive");
    let mut trace = PlanTrace::default();
    let mut cache: HashMap<String, Vec<Prediction>> = HashMap::new();
    let mut beam = vec![State::root(target)];
    let mut finished: Vec<State> = Vec::new();
    let mut seen_finished = BTreeSet::new();

    'search: while !beam.is_empty() && finished.len() < cfg.beam_width {
        trace.rounds += 1;
        let mut children: Vec<State> = Vec::new();
        for state in &beam {
            let m = state.next_open();
            let smiles = m.canonical_smiles();
            if !cache.contains_key(smiles) {
                if trace.retro_calls >= cfg.call_budget {
                    trace.budget_exhausted = true;
                    break 'search;
                }
                trace.retro_calls += 1;
                cache.insert(smiles.to_string(), predict_retro_topk(m, cfg.beam_width, lib));
            }
            for p in &cache[smiles] {
                if let Some(c) = state.child(m, p, cfg) {
                    children.push(c);
                }
            }
        }
        children.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key)));
        children.dedup_by(|a, b| a.key == b.key);
        // finished routes leave the search and do not take beam slots
        beam.clear();
        for c in children {
            if c.open.is_empty() {
                if seen_finished.insert(c.key.clone()) {
                    finished.push(c);
                }
            } else if beam.len() < cfg.beam_width {
                beam.push(c);
            }
        }
    }

    finished.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key)));
    finished.truncate(cfg.beam_width);
    let routes = finished
        .into_iter()
        .map(|s| {
            SyntheticRoute::from_steps(target.clone(), s.steps, Some(s.score.exp()))
                .expect("finished search states are valid routes")
        })
        .collect();
    PlanResult { routes, trace }
}
