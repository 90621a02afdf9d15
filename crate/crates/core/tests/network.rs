//! Reaction networks and route enumeration against recount and brute-force
//! oracles.

mod common;

use common::*;
use proptest::prelude::*;
use roundtrip::corpus::{closed_world, random_network};
use roundtrip::network::{
    build_network, default_stock, extract_routes, find_targets, RouteOptions, StockSet,
};
use roundtrip::reaction::{deduplicate, parse_reaction_smiles, ReactionDataset};
use std::collections::BTreeSet;

fn dataset(lines: &[String]) -> ReactionDataset {
    deduplicate(
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| parse_reaction_smiles(l, &i.to_string()).unwrap())
            .collect(),
    )
}

/// Checks budget-free enumeration against the oracle for every produced
/// molecule of the network; returns how many targets were compared.
fn compare(lines: &[String], max_depth: usize, stock: Option<&StockSet>) -> usize {
    let net = build_network(&dataset(lines));
    let reactions = parse_network(lines);
    let mut compared = 0;
    for p in products(&reactions) {
        let Some(want) = brute_force_routes(&reactions, &p, max_depth, stock, 2_000_000) else {
            continue;
        };
        let opts = RouteOptions {
            max_depth,
            budget: None,
            stock,
        };
        let routes = extract_routes(&net, &mol(&p), opts).unwrap();
        let got: BTreeSet<RouteKey> = routes.iter().map(route_key).collect();
        assert_eq!(got.len(), routes.len(), "duplicate routes for {p}");
        assert_eq!(got, want, "routes to {p} in {lines:?}");
        for r in &routes {
            r.validate(max_depth).unwrap();
        }
        compared += 1;
    }
    compared
}

#[test]
fn enumeration_matches_brute_force_on_random_networks() {
    let mut compared = 0;
    for seed in 0..20 {
        let lines = random_network(7, 12, seed);
        compared += compare(&lines, 15, None);
    }
    assert!(compared >= 60, "{compared}");
}

#[test]
fn enumeration_matches_brute_force_with_stock_and_tight_depth() {
    let stock = StockSet::from_smiles(["CC", "CCCC"]).unwrap();
    for seed in 20..30 {
        let lines = random_network(7, 12, seed);
        compare(&lines, 2, Some(&stock));
        compare(&lines, 3, None);
    }
}

#[test]
fn node_and_edge_counts_match_a_set_recount() {
    let c = closed_world(200, 6, 2);
    let lines: Vec<String> = c.reactions.iter().map(|r| r.canonical_text()).collect();
    let net = build_network(&dataset(&lines));
    let reactions = parse_network(&lines);
    let molecules: BTreeSet<&String> = reactions.iter().flat_map(|(rs, p)| rs.iter().chain([p])).collect();
    let edges: usize = reactions.iter().map(|(rs, _)| rs.len() + 1).sum();
    assert_eq!(net.reaction_count(), reactions.len());
    assert_eq!(net.molecule_count(), molecules.len());
    assert_eq!(net.edge_count(), edges);
}

#[test]
fn targets_match_an_out_degree_scan() {
    let c = closed_world(200, 6, 3);
    let lines: Vec<String> = c.reactions.iter().map(|r| r.canonical_text()).collect();
    let net = build_network(&dataset(&lines));
    let reactions = parse_network(&lines);
    let consumed: BTreeSet<&String> = reactions.iter().flat_map(|(rs, _)| rs).collect();
    let want: Vec<String> = products(&reactions).into_iter().filter(|p| !consumed.contains(p)).collect();
    let got: Vec<String> = find_targets(&net).iter().map(|m| m.to_string()).collect();
    assert_eq!(got, want);
    // every generated synthesis ends in a target or feeds another one
    assert!(c.targets.iter().filter(|t| want.contains(&t.to_string())).count() >= want.len() / 2);
}

#[test]
fn planted_duplicates_are_dropped() {
    let mut lines = random_network(60, 2000, 5);
    lines.truncate(900);
    assert_eq!(parse_network(&lines).len(), 900);
    // 100 repeats, written with the reactants in reverse order
    for i in 0..100 {
        let (rs, p) = lines[i * 9].split_once(">>").unwrap();
        let mut rs: Vec<&str> = rs.split('.').collect();
        rs.reverse();
        lines.push(format!("{}>>{}", rs.join("."), p));
    }
    assert_eq!(lines.len(), 1000);
    let distinct: BTreeSet<(Vec<String>, String)> = parse_network(&lines).into_iter().collect();
    assert_eq!(distinct.len(), 900);
    assert_eq!(dataset(&lines).len(), 900);
}

#[test]
fn derived_stock_is_the_union_of_leaves() {
    let c = closed_world(200, 6, 6);
    let lines: Vec<String> = c.reactions.iter().map(|r| r.canonical_text()).collect();
    let net = build_network(&dataset(&lines));
    let mut routes = Vec::new();
    for t in find_targets(&net) {
        routes.extend(extract_routes(&net, &t, RouteOptions::default()).unwrap());
    }
    let union: BTreeSet<String> = routes.iter().flat_map(|r| r.leaf_set()).collect();
    let stock = default_stock(&routes);
    assert_eq!(stock.iter().map(str::to_string).collect::<BTreeSet<_>>(), union);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>(), n in 3usize..8, r in 2usize..14, depth in 1usize..6) {
        let lines = random_network(n, r, seed);
        compare(&lines, depth, None);
    }
}
