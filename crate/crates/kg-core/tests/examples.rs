use std::collections::BTreeSet;

use kg_core::graph::{parse_graph, Format, Parsed};
use kg_core::query::{
    eval_algebra, eval_path_expr, eval_pattern, parse_bgp, parse_query, to_tsv, EvalOptions, Mapping, Mode, PathExpr,
    Semantics,
};
use kg_core::sexpr::parse_one;
use kg_core::{Edge, Graph};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn events() -> Graph {
    Graph::parse_tsv(&fixture("events.tsv")).unwrap()
}

fn row(pairs: &[(&str, &str)]) -> Mapping {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn event_graph_shape() {
    let g = events();
    assert_eq!(g.len(), 23);
    assert_eq!(g.nodes().len(), 15);
    assert_eq!(g.labels().len(), 8);
    match parse_graph(&fixture("events.tsv"), Format::Triples).unwrap() {
        Parsed::Graph(h) => assert_eq!(h, g),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn food_festival_venues_by_mode() {
    let g = events();
    let q = parse_bgp(&parse_one(&fixture("food-festival-venues.sexp")).unwrap()).unwrap();
    let hom: BTreeSet<Mapping> = eval_pattern(&g, &q, Mode::Homomorphism).into_iter().collect();
    let expected: BTreeSet<Mapping> = [
        ("EID16", "Piscina Olímpica", "Sotomayor"),
        ("EID16", "Sotomayor", "Piscina Olímpica"),
        ("EID16", "Piscina Olímpica", "Piscina Olímpica"),
        ("EID16", "Sotomayor", "Sotomayor"),
        ("EID15", "Santa Lucía", "Santa Lucía"),
    ]
    .iter()
    .map(|(e, a, b)| row(&[("ev", e), ("vn1", a), ("vn2", b)]))
    .collect();
    assert_eq!(hom, expected);
    let iso: BTreeSet<Mapping> = eval_pattern(&g, &q, Mode::NodeEdgeIso).into_iter().collect();
    let expected_iso: BTreeSet<Mapping> = [
        row(&[("ev", "EID16"), ("vn1", "Piscina Olímpica"), ("vn2", "Sotomayor")]),
        row(&[("ev", "EID16"), ("vn1", "Sotomayor"), ("vn2", "Piscina Olímpica")]),
    ]
    .into_iter()
    .collect();
    assert_eq!(iso, expected_iso);
    // No predicate variables, so edge-iso coincides with homomorphism here.
    assert_eq!(eval_pattern(&g, &q, Mode::EdgeIso).len(), 5);
}

#[test]
fn festival_connections_bag_and_set() {
    let g = events();
    let q = parse_query(&fixture("festival-connections.sexp")).unwrap();
    let bag = eval_algebra(&g, &q, EvalOptions { mode: Mode::Homomorphism, semantics: Semantics::Bag }).unwrap();
    let mut got: Vec<(String, String, String)> =
        bag.iter().map(|m| (m["name1"].clone(), m["con"].clone(), m["name2"].clone())).collect();
    got.sort();
    let mut expected: Vec<(String, String, String)> = [
        ("Food Truck", "bus", "Food Truck"),
        ("Food Truck", "bus", "Food Truck"),
        ("Food Truck", "bus", "Ñam"),
        ("Food Truck", "flight", "Ñam"),
        ("Food Truck", "flight", "Ñam"),
        ("Ñam", "bus", "Food Truck"),
        ("Ñam", "flight", "Food Truck"),
        ("Ñam", "flight", "Food Truck"),
    ]
    .iter()
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    expected.sort();
    assert_eq!(got, expected);
    let set = eval_algebra(&g, &q, EvalOptions::default()).unwrap();
    assert_eq!(set.len(), 5);
}

#[test]
fn festivals_outside_santiago() {
    let g = events();
    let q = parse_query(&fixture("festivals-outside-santiago.sexp")).unwrap();
    let rows = eval_algebra(&g, &q, EvalOptions::default()).unwrap();
    assert_eq!(rows, vec![row(&[("event", "EID16"), ("name", "Food Truck")])]);
    assert_eq!(to_tsv(&q.vars(), &rows), "?event\t?start\t?name\nEID16\t\tFood Truck\n");
}

#[test]
fn festivals_reachable_from_arica() {
    let g = events();
    let q = parse_query(&fixture("festivals-reachable-from-arica.sexp")).unwrap();
    let rows = eval_algebra(&g, &q, EvalOptions::default()).unwrap();
    let got: Vec<(&str, &str, &str)> =
        rows.iter().map(|m| (m["event"].as_str(), m["name"].as_str(), m["city"].as_str())).collect();
    assert_eq!(
        got,
        vec![
            ("EID15", "Ñam", "Santiago"),
            ("EID16", "Food Truck", "Arica"),
            ("EID16", "Food Truck", "Viña del Mar"),
        ]
    );
}

#[test]
fn bus_star_from_arica() {
    let g = events();
    let pairs = eval_path_expr(&g, &PathExpr::label("bus").star());
    let from_arica: BTreeSet<&str> =
        pairs.iter().filter(|(a, _)| a == "Arica").map(|(_, b)| b.as_str()).collect();
    assert_eq!(from_arica, BTreeSet::from(["Arica", "Santiago", "Viña del Mar"]));
}

#[test]
fn merging_graphs_with_ambiguous_names() {
    let chile = Graph::from_triples([("Santa Lucía", "city", "Santiago"), ("Santiago", "country", "Chile")]);
    let cuba = Graph::from_triples([("Santa Ifigenia", "city", "Santiago"), ("Santiago", "country", "Cuba")]);
    let merged = chile.union(&cuba);
    let countries: Vec<&str> = merged.out_edges("Santiago").map(|e| e.o.as_str()).collect();
    assert_eq!(countries, vec!["Chile", "Cuba"]);
    assert_eq!(merged.nodes().iter().filter(|n| *n == "Santiago").count(), 1);
    assert_eq!(merged.union(&Graph::empty()), merged);
    assert_eq!(merged.union(&merged), merged);
    assert!(merged.contains_edge(&Edge::new("Santa Ifigenia", "city", "Santiago")));
}
