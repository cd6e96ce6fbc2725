use std::time::Instant;

use kg_core::query::{Term, TriplePattern};
use kg_core::{Edge, Graph};
use kg_learn::analytics::pagerank;
use kg_learn::embeddings::{corruptions, train, EmbeddingModel, ModelKind, TrainConfig};
use kg_learn::miner::{mine, pca_negatives, refine, score_rule, Hypothesis, MineConfig, PcaClass};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn graph(name: &str) -> Graph {
    Graph::parse_tsv(&fixture(name)).unwrap()
}

#[test]
fn one_pagerank_superstep_on_the_bus_subgraph() {
    let d = 0.85;
    let pr = pagerank(&graph("transport-subgraph.tsv"), d, 1).unwrap();
    let base = (1.0 - d) / 6.0;
    let expected = [
        ("Arica", d / 24.0 + base),
        ("Piedras Rojas", d / 6.0 + base),
        ("Los Flamencos", d / 24.0 + d / 6.0 + base),
        ("San Pedro", 3.0 * d / 6.0 + base),
        ("Calama", d / 24.0 + base),
        ("Moon Valley", d / 24.0 + base),
    ];
    for (node, want) in expected {
        assert!((pr.get(node).unwrap() - want).abs() <= 1e-9, "{node}");
    }
    let total: f64 = pr.scores.iter().map(|(_, s)| s).sum();
    assert!((total - 1.0).abs() <= 1e-9);
    assert_eq!(pr.scores[0].0, "San Pedro");
}

#[test]
fn pagerank_residuals_shrink_on_transport() {
    let g = graph("transport.tsv");
    let pr = pagerank(&g, 0.85, 40).unwrap();
    for w in pr.residuals.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{:?}", pr.residuals);
    }
    for iters in 1..10 {
        let total: f64 = pagerank(&g, 0.85, iters).unwrap().scores.iter().map(|(_, s)| s).sum();
        assert!((total - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn coordinate_embeddings_predict_toconao() {
    let m = EmbeddingModel::parse_tsv(&fixture("directions.transe.tsv")).unwrap();
    assert_eq!(m.predict("Antofagasta", "west of", 1).unwrap()[0].0, "Toconao");
    assert!(m.score(&Edge::new("Antofagasta", "west of", "Toconao")).unwrap().abs() < 1e-12);
    // Every stored direction edge ranks its true object first.
    for e in graph("directions.tsv").edges() {
        if let Ok(top) = m.predict(&e.s, &e.p, 1) {
            assert_eq!(top[0].0, e.o, "{e}");
        }
    }
}

#[test]
fn transe_separates_airport_edges() {
    let g = graph("airports.tsv");
    let start = Instant::now();
    let cfg = TrainConfig { dim: 20, epochs: 200, seed: 42, ..TrainConfig::default() };
    let m = train(&g, ModelKind::TransE, &cfg).unwrap();
    let pos: Vec<f64> = g.edges().iter().map(|e| m.score(e).unwrap()).collect();
    let neg: Vec<f64> = g.edges().iter().flat_map(|e| corruptions(&m, &g, e)).map(|e| m.score(&e).unwrap()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&pos) > mean(&neg), "{} vs {}", mean(&pos), mean(&neg));
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn pca_classification_on_airports() {
    let g = graph("airports.tsv");
    assert_eq!(pca_negatives(&g, &Edge::new("SCL", "flight", "ARI")), PcaClass::Negative);
    assert_eq!(pca_negatives(&g, &Edge::new("SCL", "domestic flight", "ARI")), PcaClass::Unknown);
    assert_eq!(pca_negatives(&g, &Edge::new("ARI", "flight", "SCL")), PcaClass::Positive);
}

fn symmetric(label: &str) -> Hypothesis {
    Hypothesis::new(
        TriplePattern::new(Term::var("x"), Term::constant(label), Term::var("y")),
        vec![TriplePattern::new(Term::var("y"), Term::constant(label), Term::var("x"))],
    )
}

#[test]
fn symmetric_rule_scores_on_airports() {
    let g = graph("airports.tsv");
    let dom = score_rule(&g, &symmetric("domestic flight")).unwrap();
    assert_eq!((dom.support, dom.confidence), (2, 1.0));
    let fl = score_rule(&g, &symmetric("flight")).unwrap();
    assert_eq!(fl.support, 4);
    assert!((fl.confidence - 0.8).abs() < 1e-12);
}

#[test]
fn refinement_kinds_from_country_head() {
    let g = graph("airports.tsv");
    let head = Hypothesis::head_only("country");
    let level1 = refine(&g, &head, 3);
    let step1 = Hypothesis::new(
        head.head.clone(),
        vec![TriplePattern::new(Term::var("z"), Term::constant("flight"), Term::var("x"))],
    );
    assert!(level1.contains(&step1));
    let closing = TriplePattern::new(Term::var("z"), Term::constant("country"), Term::var("y"));
    let step3 = Hypothesis::new(head.head.clone(), vec![step1.body[0].clone(), closing]).canonical();
    assert!(refine(&g, &step1, 3).contains(&step3));
    assert!(step3.is_closed());
    // Kind 2 introduces constants.
    assert!(level1.iter().any(|h| h.body[0].o == Term::constant("Chile")));
}

#[test]
fn mining_airports_finds_both_symmetric_rules() {
    let g = graph("airports.tsv");
    let out = mine(&g, &MineConfig::new(2, 0.75, 2)).unwrap();
    let find = |label: &str| out.iter().find(|m| m.hypothesis == symmetric(label).canonical());
    let fl = find("flight").expect("flight rule mined").report;
    assert_eq!(fl.support, 4);
    let dom = find("domestic flight").expect("domestic flight rule mined").report;
    assert_eq!((dom.support, dom.confidence), (2, 1.0));
    assert!(out.iter().all(|m| m.hypothesis.is_closed() && m.hypothesis.is_safe()));
    assert!(mine(&g, &MineConfig::new(g.len() + 1, 0.0, 2)).unwrap().is_empty());
}
