//! Enumeration of the reference routes to a target.
//!
//! Every molecule of a route is either a leaf or made by exactly one
//! reaction, and the same molecule gets the same treatment wherever it
//! appears. Expansion works molecule by molecule: a molecule may stop as a
//! leaf if nothing in the network makes it (or it is in the stock), or be
//! expanded through each reaction that makes it, provided no reactant is
//! already on the path from the target and the depth limit allows another
//! step.

use super::route::{RouteStep, SyntheticRoute};
use super::split::StockSet;
use super::{NetworkError, ReactionNetwork};
use crate::chem::Molecule;
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_MAX_DEPTH: usize = 15;
pub const DEFAULT_ROUTE_BUDGET: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct RouteOptions<'a> {
    pub max_depth: usize,
    /// Maximum routes per target; `None` enumerates everything.
    pub budget: Option<usize>,
    /// When given, stock molecules may also stop as leaves.
    pub stock: Option<&'a StockSet>,
}

impl Default for RouteOptions<'_> {
    fn default() -> Self {
        RouteOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            budget: Some(DEFAULT_ROUTE_BUDGET),
            stock: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Choice {
    Leaf,
    Make(usize),
}

/// Treatment of every molecule in (part of) a route, keyed by canonical SMILES.
type Assignment = BTreeMap<String, Choice>;

/// All distinct routes to `target`, in expansion order (leaf options first,
/// then producing reactions by canonical reaction text), at most
/// `opts.budget` of them.
pub fn extract_routes(
    net: &ReactionNetwork,
    target: &Molecule,
    opts: RouteOptions,
) -> Result<Vec<SyntheticRoute>, NetworkError> {
    net.index(target)?;
    let cap = opts.budget.unwrap_or(usize::MAX);
    let walker = Walker { net, opts, cap };
    let mut path = Vec::new();
    let assignments = walker.expand(target, &mut path, 0, true);
    let mut seen = BTreeSet::new();
    let mut routes = Vec::new();
    for a in assignments {
        if routes.len() >= cap {
            break;
        }
        let steps: Vec<RouteStep> = a
            .values()
            .filter_map(|c| match *c {
                Choice::Make(r) => Some(RouteStep::new(
                    net.product(r).clone(),
                    net.reactants(r).into_iter().cloned().collect(),
                )),
                Choice::Leaf => None,
            })
            .collect();
        let route = SyntheticRoute::from_steps(target.clone(), steps, None)
            .expect("enumerated assignments form valid routes");
        if seen.insert(route.key()) {
            routes.push(route);
        }
    }
    Ok(routes)
}

struct Walker<'a> {
    net: &'a ReactionNetwork,
    opts: RouteOptions<'a>,
    cap: usize,
}

impl Walker<'_> {
    fn leaf_allowed(&self, m: &Molecule, producers: &[usize]) -> bool {
        producers.is_empty() || self.opts.stock.is_some_and(|s| s.contains(m))
    }

    /// Assignments covering `m` and everything below it. `path` holds the
    /// molecules from the target down to `m`'s parent; `depth` is the number
    /// of reactions between `m` and the target.
    fn expand(
        &self,
        m: &Molecule,
        path: &mut Vec<Molecule>,
        depth: usize,
        is_target: bool,
    ) -> Vec<Assignment> {
        let key = m.canonical_smiles().to_string();
        let producers = self.net.producers(m).expect("expanded molecules are in the network");
        let mut options: Vec<Assignment> = Vec::new();
        if !is_target && self.leaf_allowed(m, &producers) {
            options.push(Assignment::from([(key.clone(), Choice::Leaf)]));
        }
        if depth >= self.opts.max_depth {
            return options;
        }
        path.push(m.clone());
        for r in producers {
            if options.len() >= self.cap {
                break;
            }
            let reactants = self.net.reactants(r);
            if reactants.iter().any(|x| path.contains(x)) {
                continue;
            }
            let mut partial = vec![Assignment::from([(key.clone(), Choice::Make(r))])];
            for x in reactants {
                let below = self.expand(x, path, depth + 1, false);
                partial = self.combine(&partial, &below);
                if partial.is_empty() {
                    break;
                }
            }
            let room = self.cap - options.len();
            options.extend(partial.into_iter().take(room));
        }
        path.pop();
        options
    }

    /// Consistent unions of one assignment from each list, deduplicated,
    /// in order, at most `cap`.
    fn combine(&self, left: &[Assignment], right: &[Assignment]) -> Vec<Assignment> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in left {
            for b in right {
                let consistent = b.iter().all(|(k, c)| a.get(k).is_none_or(|ca| ca == c));
                if !consistent {
                    continue;
                }
                let mut merged = a.clone();
                merged.extend(b.iter().map(|(k, c)| (k.clone(), *c)));
                if seen.insert(merged.clone()) {
                    out.push(merged);
                    if out.len() >= self.cap {
                        return out;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;
    use crate::network::tests::network;

    fn m(s: &str) -> Molecule {
        parse_smiles(s).unwrap()
    }

    fn leaves(r: &SyntheticRoute) -> Vec<String> {
        r.leaf_set().into_iter().collect()
    }

    #[test]
    fn diamond_has_one_route() {
        let net = network(&["C>>CC", "C>>CO", "CC.CO>>CCOC"]);
        let routes = extract_routes(&net, &m("CCOC"), RouteOptions::default()).unwrap();
        assert_eq!(routes.len(), 1);
        assert_eq!(leaves(&routes[0]), vec!["C"]);
        assert_eq!(routes[0].depth, 2);
        routes[0].validate(15).unwrap();
    }

    #[test]
    fn alternatives_give_separate_routes() {
        let net = network(&["C.O>>CO", "C.N>>CO"]);
        let routes = extract_routes(&net, &m("CO"), RouteOptions::default()).unwrap();
        assert_eq!(routes.len(), 2);
    }

    #[test]
    fn intermediate_may_stop_only_when_stocked() {
        let net = network(&["C>>CC", "CC>>CCC"]);
        let routes = extract_routes(&net, &m("CCC"), RouteOptions::default()).unwrap();
        assert_eq!(routes.len(), 1);
        assert_eq!(leaves(&routes[0]), vec!["C"]);
        let stock = StockSet::from_smiles(["CC"]).unwrap();
        let opts = RouteOptions {
            stock: Some(&stock),
            ..RouteOptions::default()
        };
        let routes = extract_routes(&net, &m("CCC"), opts).unwrap();
        assert_eq!(routes.len(), 2);
        assert_eq!(leaves(&routes[0]), vec!["CC"]);
    }

    #[test]
    fn cycles_are_cut_and_depth_is_capped() {
        // CC and CO interconvert; CC is also made from C
        let net = network(&["C>>CC", "CO>>CC", "CC>>CO", "CC.CO>>CCOC"]);
        let routes = extract_routes(&net, &m("CCOC"), RouteOptions::default()).unwrap();
        for r in &routes {
            r.validate(15).unwrap();
        }
        // CO can only come from CC, and CC only from C once CO is on the path
        assert_eq!(routes.len(), 1);
        assert_eq!(routes[0].depth, 3);
        let shallow = RouteOptions {
            max_depth: 1,
            ..RouteOptions::default()
        };
        assert!(extract_routes(&net, &m("CCOC"), shallow).unwrap().is_empty());
    }

    #[test]
    fn budget_caps_output() {
        let net = network(&["C.O>>CO", "C.N>>CO", "C.S>>CO"]);
        let opts = RouteOptions {
            budget: Some(2),
            ..RouteOptions::default()
        };
        assert_eq!(extract_routes(&net, &m("CO"), opts).unwrap().len(), 2);
    }

    #[test]
    fn unknown_target() {
        let net = network(&["C>>CC"]);
        assert!(extract_routes(&net, &m("N"), RouteOptions::default()).is_err());
    }
}
