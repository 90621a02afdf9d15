//! Forward reproduction of planned routes and the round-trip score.
//!
//! A route is replayed from its leaves with the forward model, feeding each
//! step the molecules the model actually predicted upstream rather than the
//! ones the route recorded, so an early mistake carries through to the end.
//! The round-trip score is the Tanimoto similarity between the target and
//! whatever comes out.

use crate::chem::{fingerprint_with, tanimoto, FingerprintParams, Molecule};
use crate::network::SyntheticRoute;
use crate::num::Scalar;
use crate::planner::{plan, PlanTrace, PlannerConfig};
use crate::templates::{predict_forward, TemplateLibrary};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// What the route says this step makes.
    pub expected: Molecule,
    /// What the forward model made; absent at and after a failed step.
    pub predicted: Option<Molecule>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproductionResult {
    /// The forward model's version of the target, when every step ran.
    pub reproduced: Option<Molecule>,
    /// One entry per route step, in application order.
    pub steps: Vec<StepOutcome>,
    /// Index of the step the forward model had no rule for.
    pub failure_step: Option<usize>,
}

impl ReproductionResult {
    pub fn all_matched(&self) -> bool {
        self.steps.iter().all(|s| s.matched)
    }
}

/// Replays `route` with the forward model.
pub fn reproduce(route: &SyntheticRoute, fwd: &TemplateLibrary) -> ReproductionResult {
    reproduce_with(route, fwd, &BTreeMap::new())
}

/// Replays `route`, replacing any molecule named in `substitutions` (leaf or
/// intermediate, keyed by the route's recorded molecule) by its substitute
/// wherever it would be fed into a later step.
pub fn reproduce_with(
    route: &SyntheticRoute,
    fwd: &TemplateLibrary,
    substitutions: &BTreeMap<Molecule, Molecule>,
) -> ReproductionResult {
    let mut produced: BTreeMap<&Molecule, Molecule> = BTreeMap::new();
    let mut steps = Vec::with_capacity(route.steps.len());
    let mut failure_step = None;
    for (i, step) in route.steps.iter().enumerate() {
        if failure_step.is_some() {
            steps.push(StepOutcome {
                expected: step.product.clone(),
                predicted: None,
                matched: false,
            });
            continue;
        }
        let inputs: Vec<Molecule> = step
            .reactants
            .iter()
            .map(|r| {
                substitutions
                    .get(r)
                    .or_else(|| produced.get(r))
                    .unwrap_or(r)
                    .clone()
            })
            .collect();
        match predict_forward(&inputs, fwd) {
            Ok(p) => {
                let made = p.molecules.into_iter().next().expect("one forward product");
                steps.push(StepOutcome {
                    expected: step.product.clone(),
                    matched: made == step.product,
                    predicted: Some(made.clone()),
                });
                produced.insert(&step.product, made);
            }
            Err(_) => {
                failure_step = Some(i);
                steps.push(StepOutcome {
                    expected: step.product.clone(),
                    predicted: None,
                    matched: false,
                });
            }
        }
    }
    let reproduced = if failure_step.is_none() {
        produced.remove(&route.target)
    } else {
        None
    };
    ReproductionResult {
        reproduced,
        steps,
        failure_step,
    }
}

/// Tanimoto similarity between `m` and the reproduced molecule; zero when
/// reproduction failed.
pub fn round_trip_score<S: Scalar>(
    m: &Molecule,
    rr: &ReproductionResult,
    params: FingerprintParams,
) -> S {
    match &rr.reproduced {
        Some(made) => tanimoto(&fingerprint_with(m, params), &fingerprint_with(made, params)),
        None => S::zero(),
    }
}

/// Scored outcome for one planned route (or the stock short-circuit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripRecord {
    pub molecule: Molecule,
    /// Absent for stock molecules, which are not planned.
    pub route: Option<SyntheticRoute>,
    pub score: f64,
    pub is_stock_shortcircuit: bool,
    pub reproduction: Option<ReproductionResult>,
}

#[derive(Debug, Clone)]
pub struct MoleculeScore {
    /// Records in planner confidence order, at most `k`.
    pub records: Vec<RoundTripRecord>,
    /// Absent when the molecule was in stock and no planning happened.
    pub trace: Option<PlanTrace>,
}

/// Plans, reproduces and scores the top `k` routes of `m`. Stock molecules
/// score 1 without planning.
pub fn score_molecule(
    m: &Molecule,
    cfg: &PlannerConfig,
    retro: &TemplateLibrary,
    fwd: &TemplateLibrary,
    k: usize,
    params: FingerprintParams,
) -> MoleculeScore {
    assert!(k <= cfg.beam_width, "k cannot exceed the beam width");
    if cfg.stock.contains(m) {
        return MoleculeScore {
            records: vec![RoundTripRecord {
                molecule: m.clone(),
                route: None,
                score: 1.0,
                is_stock_shortcircuit: true,
                reproduction: None,
            }],
            trace: None,
        };
    }
    let planned = plan(m, cfg, retro);
    let records = planned
        .routes
        .into_iter()
        .take(k)
        .map(|route| {
            let rr = reproduce(&route, fwd);
            RoundTripRecord {
                molecule: m.clone(),
                score: round_trip_score(m, &rr, params),
                route: Some(route),
                is_stock_shortcircuit: false,
                reproduction: Some(rr),
            }
        })
        .collect();
    MoleculeScore {
        records,
        trace: Some(planned.trace),
    }
}
