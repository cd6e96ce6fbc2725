use std::collections::BTreeSet;

use kg_core::query::{eval_algebra, parse_bgp, parse_query, EvalOptions};
use kg_core::sexpr::parse_one;
use kg_core::{Edge, Graph};
use kg_reason::annotations::{eval_annotated, temporal_domain, AnnotatedGraph, AnnotationDomain};
use kg_reason::rules::{builtin_ruleset, least_model};
use kg_reason::schema::{bisim_min_quotient, check_bisimulation, check_simulation, quotient, refine, Partition};
use kg_reason::shapes::{compute_shapes_map, parse_schema, parse_targets, validate};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn events() -> Graph {
    Graph::parse_tsv(&fixture("events.tsv")).unwrap()
}

#[test]
fn event_shapes_conformance() {
    let g = events();
    let schema = parse_schema(&fixture("events.shapes")).unwrap();
    let sigma = compute_shapes_map(&g, &schema).unwrap();
    assert!(sigma.get("EID15", "Event"));
    assert!(!sigma.get("EID16", "Event"));
    assert!(sigma.get("Santiago", "City"));
    assert!(sigma.get("Santa Lucía", "Venue"));

    assert!(validate(&g, &schema, &[]).unwrap().valid);
    let report = validate(&g, &schema, &parse_targets(&fixture("events.targets.tsv")).unwrap()).unwrap();
    assert!(!report.valid);
    assert_eq!(report.violations, vec![("EID16".to_string(), "Event".to_string())]);
    assert_eq!(report.to_tsv(), "EID16\tEvent\n");
    assert!(validate(&g, &schema, &parse_targets(&fixture("events.valid-targets.tsv")).unwrap()).unwrap().valid);
}

#[test]
fn closed_city_rejects_unexpected_labels() {
    let text = fixture("events.shapes").replace(
        r#"(count "population" (and (cond int) (cond >5000)) 0 1))"#,
        r#"(and (count "population" (and (cond int) (cond >5000)) 0 1)
                (closed "population" "lat" "long" "flight" "bus")))"#,
    );
    let schema = parse_schema(&text).unwrap();
    let target = vec![("Santiago".to_string(), "City".to_string())];
    assert!(validate(&events(), &schema, &target).unwrap().valid);
    let founded = events().union(&Graph::from_triples([("Santiago", "founder", "Pedro de Valdivia")]));
    let report = validate(&founded, &schema, &target).unwrap();
    assert_eq!(report.violations, target);
    // The open schema still accepts it.
    let open = parse_schema(&fixture("events.shapes")).unwrap();
    assert!(validate(&founded, &open, &target).unwrap().valid);
}

#[test]
fn event_quotient_simulates_and_refines() {
    let g = events();
    let part = Partition::parse_tsv(&fixture("events.partition.tsv")).unwrap();
    assert_eq!(part.len(), 6);
    let q = quotient(&g, &part).unwrap();
    assert!(q.graph.contains("{EID15|EID16}", "venue", "{Piscina Olímpica|Santa Lucía|Sotomayor}"));
    assert!(check_simulation(&g, &q.graph, &q.membership()));
    assert!(!check_bisimulation(&g, &q.graph, &q.membership()));

    let refined = refine(&g, &part).unwrap();
    assert_eq!(refined.len(), 7);
    let parts: BTreeSet<&BTreeSet<String>> = refined.parts().iter().collect();
    assert!(parts.contains(&BTreeSet::from(["EID15".to_string()])));
    assert!(parts.contains(&BTreeSet::from(["EID16".to_string()])));
    let q = bisim_min_quotient(&g, &part).unwrap();
    assert!(check_bisimulation(&g, &q.graph, &q.membership()));
    assert!(q.graph.contains("{EID15}", "start", "{2018-03-22 12:00|2018-03-29 20:00}"));
    assert!(!q.graph.out_edges("{EID16}").any(|e| e.p == "start"));
}

#[test]
fn temporal_flights_to_cities_with_events() {
    let d = temporal_domain();
    let g = AnnotatedGraph::parse_tsv(&d, &fixture("annotated-flights.tsv")).unwrap();
    let q = parse_bgp(&parse_one(&fixture("flight-cities-with-events.sexp")).unwrap()).unwrap();
    let rows = eval_annotated(&g, &q, &["city".to_string()], &d, true);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0["city"], "Arica");
    assert_eq!(d.render(&rows[0].1), "[123,125];[276,279]");

    let kept = eval_annotated(&g, &q, &["city".to_string()], &d, false);
    assert_eq!(kept.len(), 2);
    assert_eq!(kept[1].0["city"], "Punta Arenas");
    assert!(kept[1].1.is_empty());
}

#[test]
fn festivals_in_santiago_after_materialization() {
    let data = events().union(&Graph::parse_tsv(&fixture("festival-ontology.tsv")).unwrap());
    let q = parse_query(&fixture("festivals-in-santiago.sexp")).unwrap();
    let names = |g: &Graph| -> Vec<String> {
        eval_algebra(g, &q, EvalOptions::default()).unwrap().into_iter().map(|m| m["name"].clone()).collect()
    };
    assert!(names(&data).is_empty());
    // Sub-classes alone give the festival type but not the location.
    assert!(names(&least_model(&data, &builtin_ruleset("rdfs").unwrap())).is_empty());
    let model = least_model(&data, &builtin_ruleset("owl-subset").unwrap());
    assert!(model.contains_edge(&Edge::new("EID15", "type", "Festival")));
    assert!(model.contains_edge(&Edge::new("EID15", "location", "Santiago")));
    assert_eq!(names(&model), vec!["Ñam"]);
}
