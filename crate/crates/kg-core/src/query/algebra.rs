use std::collections::BTreeSet;

use super::{compatible, eval_pattern, eval_rpq, AlgebraExpr, Mapping, Mode, QueryError, Semantics};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    pub mode: Mode,
    pub semantics: Semantics,
}

/// Evaluates an algebra expression. Rows are sorted by `e.vars()`; under bag
/// semantics multiplicities are kept through every operator.
pub fn eval_algebra(g: &Graph, e: &AlgebraExpr, opts: EvalOptions) -> Result<Vec<Mapping>, QueryError> {
    e.check()?;
    let mut rows = eval(g, e, opts);
    if opts.semantics == Semantics::Set {
        dedup(&mut rows);
    }
    super::sort_rows(&e.vars(), &mut rows);
    Ok(rows)
}

fn dedup(rows: &mut Vec<Mapping>) {
    let mut seen = BTreeSet::new();
    rows.retain(|mu| seen.insert(mu.clone()));
}

fn eval(g: &Graph, e: &AlgebraExpr, opts: EvalOptions) -> Vec<Mapping> {
    let mut rows = match e {
        AlgebraExpr::Base(p) => eval_pattern(g, p, opts.mode),
        AlgebraExpr::PathAtom(q) => eval_rpq(g, q),
        AlgebraExpr::Project(vs, inner) => eval(g, inner, opts)
            .into_iter()
            .map(|mu| restrict(mu, vs))
            .collect(),
        AlgebraExpr::Select(c, inner) => eval(g, inner, opts).into_iter().filter(|mu| c.holds(mu)).collect(),
        AlgebraExpr::Join(a, b) => join(&eval(g, a, opts), &eval(g, b, opts)),
        AlgebraExpr::Union(a, b) => {
            let mut rows = eval(g, a, opts);
            rows.extend(eval(g, b, opts));
            rows
        }
        AlgebraExpr::Minus(a, b) => {
            let right: BTreeSet<Mapping> = eval(g, b, opts).into_iter().collect();
            eval(g, a, opts).into_iter().filter(|mu| !right.contains(mu)).collect()
        }
        AlgebraExpr::AntiJoin(a, b) => {
            let left = eval(g, a, opts);
            anti_join(&left, &eval(g, b, opts), &a.vars())
        }
        AlgebraExpr::LeftJoin(a, b) => {
            let left = eval(g, a, opts);
            let right = eval(g, b, opts);
            let mut rows = join(&left, &right);
            rows.extend(anti_join(&left, &right, &a.vars()));
            rows
        }
    };
    if opts.semantics == Semantics::Set {
        dedup(&mut rows);
    }
    rows
}

fn restrict(mut mu: Mapping, vars: &[String]) -> Mapping {
    mu.retain(|k, _| vars.contains(k));
    mu
}

/// `{μ1 ∪ μ2 | μ1 ∈ left, μ2 ∈ right, μ1 ∼ μ2}` with multiplicities.
fn join(left: &[Mapping], right: &[Mapping]) -> Vec<Mapping> {
    let mut out = Vec::new();
    for m1 in left {
        for m2 in right {
            if compatible(m1, m2) {
                let mut m = m1.clone();
                m.extend(m2.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.push(m);
            }
        }
    }
    out
}

/// `Q1 − π_var(Q1)(Q1 ⋈ Q2)`.
fn anti_join(left: &[Mapping], right: &[Mapping], left_vars: &[String]) -> Vec<Mapping> {
    let removed: BTreeSet<Mapping> = join(left, right)
        .into_iter()
        .map(|mu| restrict(mu, left_vars))
        .collect();
    left.iter().filter(|mu| !removed.contains(*mu)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn run(g: &Graph, q: &str, semantics: Semantics) -> Vec<Mapping> {
        let e = parse_query(q).unwrap();
        eval_algebra(g, &e, EvalOptions { mode: Mode::Homomorphism, semantics }).unwrap()
    }

    #[test]
    fn optional_keeps_unmatched_rows() {
        let g = Graph::from_triples([("a", "p", "b"), ("c", "p", "d"), ("a", "q", "z")]);
        let rows = run(&g, r#"(optional (bgp (?x "p" ?y)) (bgp (?x "q" ?w)))"#, Semantics::Set);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["w"], "z");
        assert_eq!(rows[1].get("w"), None);
    }

    #[test]
    fn minus_is_exact_mapping_difference() {
        let g = Graph::from_triples([("a", "p", "b"), ("c", "p", "d"), ("a", "q", "b")]);
        let rows = run(&g, r#"(minus (bgp (?x "p" ?y)) (bgp (?x "q" ?y)))"#, Semantics::Set);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["x"], "c");
    }

    #[test]
    fn bag_projection_keeps_duplicates() {
        let g = Graph::from_triples([("a", "p", "b"), ("a", "p", "c")]);
        assert_eq!(run(&g, r#"(project (?x) (bgp (?x "p" ?y)))"#, Semantics::Bag).len(), 2);
        assert_eq!(run(&g, r#"(project (?x) (bgp (?x "p" ?y)))"#, Semantics::Set).len(), 1);
    }

    #[test]
    fn filter_against_unbound_is_false() {
        let g = Graph::from_triples([("a", "p", "b")]);
        let rows = run(
            &g,
            r#"(filter (not (= ?w "z")) (optional (bgp (?x "p" ?y)) (bgp (?x "q" ?w))))"#,
            Semantics::Set,
        );
        assert_eq!(rows.len(), 1);
        let rows = run(&g, r#"(filter (= ?w "z") (optional (bgp (?x "p" ?y)) (bgp (?x "q" ?w))))"#, Semantics::Set);
        assert!(rows.is_empty());
    }

    #[test]
    fn static_check_rejects_unbound_filter_variable() {
        let g = Graph::empty();
        let e = parse_query(r#"(filter (= ?nope "x") (bgp (?x "p" ?y)))"#).unwrap();
        assert!(matches!(eval_algebra(&g, &e, EvalOptions::default()), Err(QueryError::Static(_))));
        let e = parse_query(r#"(project (?nope) (bgp (?x "p" ?y)))"#).unwrap();
        assert!(eval_algebra(&g, &e, EvalOptions::default()).is_err());
    }
}
