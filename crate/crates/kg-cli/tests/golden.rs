//! End-to-end runs of the `kg` binary against committed expected output.
//! Set `KG_BLESS=1` to rewrite the expected files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn kg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kg")).args(args).current_dir(fixtures()).output().expect("kg runs")
}

fn golden(name: &str, args: &[&str], exit: i32) {
    let out = kg(args);
    let stdout = String::from_utf8(out.stdout).expect("utf-8 output");
    assert_eq!(out.status.code(), Some(exit), "{name}: stderr {}", String::from_utf8_lossy(&out.stderr));
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.tsv"));
    if std::env::var_os("KG_BLESS").is_some() {
        std::fs::write(&path, &stdout).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(stdout, want, "{name}");
}

#[test]
fn query() {
    golden("query", &["query", "--graph", "events.tsv", "--query", "festivals-outside-santiago.sexp"], 0);
    golden(
        "query-bag",
        &["query", "--graph", "events.tsv", "--query", "festival-connections.sexp", "--semantics", "bag"],
        0,
    );
    golden(
        "query-iso",
        &["query", "--graph", "events.tsv", "--query", "food-festival-venues.sexp", "--mode", "node-edge-iso"],
        0,
    );
}

#[test]
fn validate() {
    let base = ["validate", "--graph", "events.tsv", "--schema", "events.shapes"];
    golden("validate", &[&base[..], &["--target", "events.targets.tsv"]].concat(), 1);
    golden("validate-ok", &[&base[..], &["--target", "events.valid-targets.tsv"]].concat(), 0);
    golden("validate-empty", &base, 0);
}

#[test]
fn materialize() {
    golden(
        "materialize",
        &["materialize", "--graph", "events.tsv", "--graph", "festival-ontology.tsv", "--rules", "owl-subset"],
        0,
    );
    golden("materialize-file", &["materialize", "--graph", "airports.tsv", "--rules", "symmetric-flights.rules"], 0);
}

#[test]
fn entails() {
    golden("entails", &["entails", "--g1", "santiago-city.tsv", "--g2", "santiago-place.tsv", "--rules", "rdfs"], 0);
    golden("entails-not", &["entails", "--g1", "santiago-place.tsv", "--g2", "santiago-city.tsv", "--rules", "rdfs"], 1);
}

#[test]
fn consistency() {
    golden("consistency", &["consistency", "--graph", "disjoint-festivals.tsv", "--rules", "rdfs"], 1);
    golden("consistency-ok", &["consistency", "--graph", "events.tsv", "--rules", "rdfs"], 0);
}

#[test]
fn quotient() {
    golden("quotient", &["quotient", "--graph", "events.tsv", "--partition", "events.partition.tsv"], 0);
}

#[test]
fn bisim() {
    golden("bisim", &["bisim", "--graph", "events.tsv", "--partition", "events.partition.tsv"], 0);
}

#[test]
fn pagerank() {
    golden("pagerank", &["pagerank", "--graph", "transport.tsv", "--d", "0.85", "--iters", "20"], 0);
    golden(
        "pagerank-labels",
        &["pagerank", "--graph", "transport.tsv", "--labels", "bus,flight", "--epsilon", "1e-6", "--iters", "100"],
        0,
    );
}

#[test]
fn annotate_query() {
    golden(
        "annotate-query",
        &["annotate-query", "--graph", "annotated-flights.tsv", "--query", "flight-cities-with-events.sexp", "--project", "city"],
        0,
    );
}

#[test]
fn embeddings() {
    let dir = std::env::temp_dir().join(format!("kg-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("airports.transe.tsv");
    let model = model.to_str().unwrap();
    let train = ["embed-train", "--graph", "airports.tsv", "--model", "transe", "--dim", "8", "--epochs", "20"];
    golden("embed-train", &[&train[..], &["--seed", "1"]].concat(), 0);
    assert!(kg(&[&train[..], &["--seed", "1", "--out", model]].concat()).status.success());
    golden("embed-score", &["embed-score", "--embeddings", model, "--edges", "airport-queries.tsv"], 0);
    golden("embed-predict", &["embed-predict", "--embeddings", model, "--s", "SCL", "--p", "flight", "--k", "3"], 0);
    golden(
        "embed-predict-directions",
        &["embed-predict", "--embeddings", "directions.transe.tsv", "--s", "Antofagasta", "--p", "west of", "--k", "1"],
        0,
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mine() {
    golden(
        "mine",
        &["mine", "--graph", "airports.tsv", "--min-support", "2", "--min-conf", "0.75", "--max-len", "2"],
        0,
    );
}

#[test]
fn convert() {
    golden("convert-pg", &["convert", "--input", "flights.pg.tsv", "--from", "tsv-pg", "--to", "tsv-triples"], 0);
    golden("convert-del", &["convert", "--input", "flights.pg.tsv", "--from", "tsv-pg", "--to", "tsv-pg"], 0);
    golden(
        "convert-dataset",
        &["convert", "--input", "sources.dataset.tsv", "--from", "tsv-dataset", "--to", "tsv-triples"],
        0,
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let runs: [&[&str]; 3] = [
        &["pagerank", "--graph", "transport.tsv"],
        &["mine", "--graph", "airports.tsv", "--max-len", "2", "--min-support", "1", "--min-conf", "0"],
        &["embed-train", "--graph", "airports.tsv", "--dim", "6", "--epochs", "10", "--model", "complex"],
    ];
    for args in runs {
        let one = kg(&[args, &["--threads", "1"]].concat());
        let four = kg(&[args, &["--threads", "4"]].concat());
        assert!(one.status.success());
        assert_eq!(one.stdout, four.stdout, "{args:?}");
        assert_eq!(one.stdout, kg(args).stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        &["frobnicate"][..],
        &[],
        &["query", "--graph", "events.tsv"],
        &["pagerank", "--graph", "events.tsv", "--bogus"],
        &["query", "--graph", "missing.tsv", "--query", "festival-connections.sexp"],
        &["query", "--graph", "events.shapes", "--query", "festival-connections.sexp"],
        &["query", "--graph", "events.tsv", "--query", "events.tsv"],
        &["materialize", "--graph", "events.tsv", "--rules", "no-such-rules"],
        &["embed-predict", "--embeddings", "directions.transe.tsv", "--s", "Nowhere", "--p", "west of"],
        &["mine", "--graph", "airports.tsv", "--min-conf", "1.5"],
    ] {
        let out = kg(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let out = kg(&["frobnicate"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(kg(&["--help"]).status.success());
}
