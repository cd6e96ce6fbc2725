use std::collections::BTreeSet;

use super::{Mapping, Mode, Pattern, Term, TriplePattern};
use crate::graph::{Edge, Graph};

/// `{μ | μ(Q) ⊆ G, dom(μ) = var(Q)}`, filtered for the isomorphism modes.
///
/// Index-nested-loop evaluation: at each step the remaining triple pattern
/// with the fewest candidate edges under the current bindings goes next.
/// Results come back sorted and duplicate-free.
pub fn eval_pattern(g: &Graph, q: &Pattern, mode: Mode) -> Vec<Mapping> {
    let mut out = Vec::new();
    let mut remaining: Vec<&TriplePattern> = q.triples.iter().collect();
    extend(g, &mut remaining, &mut Mapping::new(), &mut out);
    let node_vars = q.node_vars();
    let edge_vars = q.edge_vars();
    out.retain(|mu| match mode {
        Mode::Homomorphism => true,
        Mode::EdgeIso => injective(mu, &edge_vars),
        Mode::NodeEdgeIso => injective(mu, &edge_vars) && injective(mu, &node_vars),
    });
    out.sort();
    out.dedup();
    out
}

/// Homomorphic solutions of `q` that extend `seed`; each returned mapping
/// binds `dom(seed) ∪ var(Q)`.
pub fn eval_pattern_seeded(g: &Graph, q: &Pattern, seed: &Mapping) -> Vec<Mapping> {
    let mut out = Vec::new();
    let mut remaining: Vec<&TriplePattern> = q.triples.iter().collect();
    extend(g, &mut remaining, &mut seed.clone(), &mut out);
    out
}

fn injective(mu: &Mapping, vars: &BTreeSet<&str>) -> bool {
    let mut seen = BTreeSet::new();
    vars.iter().all(|v| seen.insert(&mu[*v]))
}

fn bound<'a>(t: &'a Term, mu: &'a Mapping) -> Option<&'a str> {
    t.resolve(mu)
}

fn extend(g: &Graph, remaining: &mut Vec<&TriplePattern>, mu: &mut Mapping, out: &mut Vec<Mapping>) {
    if remaining.is_empty() {
        out.push(mu.clone());
        return;
    }
    let (best, _) = remaining
        .iter()
        .enumerate()
        .map(|(i, t)| (i, g.candidate_count(bound(&t.s, mu), bound(&t.p, mu), bound(&t.o, mu))))
        .min_by_key(|&(i, c)| (c, i))
        .expect("non-empty");
    let t = remaining.swap_remove(best);
    let edges: Vec<Edge> = g
        .matching(bound(&t.s, mu), bound(&t.p, mu), bound(&t.o, mu))
        .into_iter()
        .cloned()
        .collect();
    for e in &edges {
        let mut added = Vec::new();
        if bind(&t.s, &e.s, mu, &mut added) && bind(&t.p, &e.p, mu, &mut added) && bind(&t.o, &e.o, mu, &mut added) {
            extend(g, remaining, mu, out);
        }
        for v in added {
            mu.remove(&v);
        }
    }
    remaining.push(t);
    let last = remaining.len() - 1;
    remaining.swap(best, last);
}

/// Binds `t` to `c`, recording fresh bindings; false on a clash (a variable
/// repeated inside one triple).
fn bind(t: &Term, c: &str, mu: &mut Mapping, added: &mut Vec<String>) -> bool {
    match t {
        Term::Const(k) => k == c,
        Term::Var(v) => match mu.get(v) {
            Some(x) => x == c,
            None => {
                mu.insert(v.clone(), c.to_string());
                added.push(v.clone());
                true
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(s: &str, p: &str, o: &str) -> TriplePattern {
        let term = |x: &str| {
            if let Some(v) = x.strip_prefix('?') {
                Term::var(v)
            } else {
                Term::constant(x)
            }
        };
        TriplePattern::new(term(s), term(p), term(o))
    }

    #[test]
    fn ground_subgraph_gives_empty_mapping() {
        let g = Graph::from_triples([("a", "p", "b")]);
        let q = Pattern::new(vec![tp("a", "p", "b")]);
        assert_eq!(eval_pattern(&g, &q, Mode::Homomorphism), vec![Mapping::new()]);
        let miss = Pattern::new(vec![tp("a", "p", "c")]);
        assert!(eval_pattern(&g, &miss, Mode::Homomorphism).is_empty());
        assert_eq!(eval_pattern(&g, &Pattern::default(), Mode::Homomorphism), vec![Mapping::new()]);
    }

    #[test]
    fn repeated_variable_in_triple() {
        let g = Graph::from_triples([("a", "p", "a"), ("a", "p", "b")]);
        let q = Pattern::new(vec![tp("?x", "p", "?x")]);
        let rows = eval_pattern(&g, &q, Mode::Homomorphism);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["x"], "a");
    }

    #[test]
    fn edge_iso_separates_predicate_variables() {
        let g = Graph::from_triples([("a", "p", "b"), ("a", "q", "b")]);
        let q = Pattern::new(vec![tp("a", "?x", "b"), tp("a", "?y", "b")]);
        assert_eq!(eval_pattern(&g, &q, Mode::Homomorphism).len(), 4);
        assert_eq!(eval_pattern(&g, &q, Mode::EdgeIso).len(), 2);
    }
}
