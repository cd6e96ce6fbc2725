use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{Mapping, PathExpr, Rpq, Term};
use crate::graph::Graph;

type Pairs = BTreeSet<(String, String)>;

/// `r[G]`: the endpoint pairs connected by a path matching `r`.
pub fn eval_path_expr(g: &Graph, r: &PathExpr) -> Pairs {
    match r {
        PathExpr::Label(l) => g.edges_with_label(l).map(|e| (e.s.clone(), e.o.clone())).collect(),
        PathExpr::Inverse(r) => eval_path_expr(g, r).into_iter().map(|(a, b)| (b, a)).collect(),
        PathExpr::Alt(a, b) => {
            let mut out = eval_path_expr(g, a);
            out.extend(eval_path_expr(g, b));
            out
        }
        PathExpr::Concat(a, b) => compose(&eval_path_expr(g, a), &eval_path_expr(g, b)),
        PathExpr::Star(r) => star(g, &eval_path_expr(g, r)),
    }
}

fn successors(rel: &Pairs) -> BTreeMap<&str, Vec<&str>> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in rel {
        succ.entry(a.as_str()).or_default().push(b.as_str());
    }
    succ
}

fn compose(left: &Pairs, right: &Pairs) -> Pairs {
    let succ = successors(right);
    let mut out = Pairs::new();
    for (a, b) in left {
        for c in succ.get(b.as_str()).into_iter().flatten() {
            out.insert((a.clone(), c.to_string()));
        }
    }
    out
}

/// `{(v, v) | v ∈ V}` plus the transitive closure of `rel`.
fn star(g: &Graph, rel: &Pairs) -> Pairs {
    let succ = successors(rel);
    let starts: BTreeSet<&str> = g.nodes().iter().map(String::as_str).chain(succ.keys().copied()).collect();
    let mut out = Pairs::new();
    for &v in &starts {
        let mut seen = BTreeSet::from([v]);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in succ.get(u).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        out.extend(seen.into_iter().map(|w| (v.to_string(), w.to_string())));
    }
    out
}

/// Regular path query evaluation by the four constant/variable endpoint cases.
pub fn eval_rpq(g: &Graph, q: &Rpq) -> Vec<Mapping> {
    let pairs = eval_path_expr(g, &q.r);
    let mut out: Vec<Mapping> = match (&q.x, &q.y) {
        (Term::Const(c1), Term::Const(c2)) => {
            if pairs.contains(&(c1.clone(), c2.clone())) {
                vec![Mapping::new()]
            } else {
                vec![]
            }
        }
        (Term::Const(c), Term::Var(y)) => pairs
            .iter()
            .filter(|(a, _)| a == c)
            .map(|(_, b)| Mapping::from([(y.clone(), b.clone())]))
            .collect(),
        (Term::Var(x), Term::Const(c)) => pairs
            .iter()
            .filter(|(_, b)| b == c)
            .map(|(a, _)| Mapping::from([(x.clone(), a.clone())]))
            .collect(),
        (Term::Var(x), Term::Var(y)) if x == y => pairs
            .iter()
            .filter(|(a, b)| a == b)
            .map(|(a, _)| Mapping::from([(x.clone(), a.clone())]))
            .collect(),
        (Term::Var(x), Term::Var(y)) => pairs
            .iter()
            .map(|(a, b)| Mapping::from([(x.clone(), a.clone()), (y.clone(), b.clone())]))
            .collect(),
    };
    out.sort();
    out.dedup();
    out
}

/// One traversed edge of an enumerated path; `forward` is false when the
/// edge was walked against its direction (under an inverse).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathStep {
    pub from: String,
    pub label: String,
    pub to: String,
    pub forward: bool,
}

/// Path expression with inverses pushed down to the labels.
#[derive(Clone, Debug)]
enum Norm {
    Sym(String, bool),
    Star(Box<Norm>),
    Seq(Box<Norm>, Box<Norm>),
    Alt(Box<Norm>, Box<Norm>),
}

fn normalize(r: &PathExpr, inverted: bool) -> Norm {
    match r {
        PathExpr::Label(l) => Norm::Sym(l.clone(), !inverted),
        PathExpr::Inverse(r) => normalize(r, !inverted),
        PathExpr::Star(r) => Norm::Star(Box::new(normalize(r, inverted))),
        PathExpr::Alt(a, b) => Norm::Alt(Box::new(normalize(a, inverted)), Box::new(normalize(b, inverted))),
        PathExpr::Concat(a, b) => {
            let (a, b) = (normalize(a, inverted), normalize(b, inverted));
            if inverted {
                Norm::Seq(Box::new(b), Box::new(a))
            } else {
                Norm::Seq(Box::new(a), Box::new(b))
            }
        }
    }
}

/// Positions reachable after matching `r` from each start position.
fn advance(r: &Norm, word: &[(&str, bool)], starts: &BTreeSet<usize>) -> BTreeSet<usize> {
    match r {
        Norm::Sym(l, fwd) => starts
            .iter()
            .filter(|&&i| i < word.len() && word[i].0 == l && word[i].1 == *fwd)
            .map(|i| i + 1)
            .collect(),
        Norm::Seq(a, b) => advance(b, word, &advance(a, word, starts)),
        Norm::Alt(a, b) => advance(a, word, starts).union(&advance(b, word, starts)).copied().collect(),
        Norm::Star(a) => {
            let mut all = starts.clone();
            let mut frontier = starts.clone();
            while !frontier.is_empty() {
                let next: BTreeSet<usize> = advance(a, word, &frontier).difference(&all).copied().collect();
                all.extend(&next);
                frontier = next;
            }
            all
        }
    }
}

fn matches(r: &Norm, steps: &[PathStep]) -> bool {
    let word: Vec<(&str, bool)> = steps.iter().map(|s| (s.label.as_str(), s.forward)).collect();
    advance(r, &word, &BTreeSet::from([0])).contains(&word.len())
}

/// Simple paths (no repeated node) of length ≤ `k` from `x` whose label
/// word matches `r`, optionally ending at `y`. Debugging aid; exponential.
pub fn enumerate_paths(g: &Graph, x: &str, r: &PathExpr, y: Option<&str>, k: usize) -> Vec<Vec<PathStep>> {
    let norm = normalize(r, false);
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut visited = BTreeSet::from([x.to_string()]);
    walk(g, x, &norm, y, k, &mut path, &mut visited, &mut out);
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn walk(
    g: &Graph,
    at: &str,
    r: &Norm,
    y: Option<&str>,
    k: usize,
    path: &mut Vec<PathStep>,
    visited: &mut BTreeSet<String>,
    out: &mut Vec<Vec<PathStep>>,
) {
    if y.is_none_or(|y| y == at) && matches(r, path) {
        out.push(path.clone());
    }
    if path.len() == k {
        return;
    }
    let steps: Vec<PathStep> = g
        .out_edges(at)
        .map(|e| PathStep { from: e.s.clone(), label: e.p.clone(), to: e.o.clone(), forward: true })
        .chain(g.in_edges(at).map(|e| PathStep { from: e.o.clone(), label: e.p.clone(), to: e.s.clone(), forward: false }))
        .collect();
    for step in steps {
        if visited.contains(&step.to) {
            continue;
        }
        visited.insert(step.to.clone());
        let next = step.to.clone();
        path.push(step);
        walk(g, &next, r, y, k, path, visited, out);
        path.pop();
        visited.remove(&next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Graph {
        Graph::from_triples([("a", "bus", "b"), ("b", "bus", "c"), ("c", "flight", "a")])
    }

    #[test]
    fn star_is_reflexive_transitive() {
        let g = chain();
        let pairs = eval_path_expr(&g, &PathExpr::label("bus").star());
        for n in g.nodes() {
            assert!(pairs.contains(&(n.clone(), n.clone())));
        }
        assert!(pairs.contains(&("a".into(), "c".into())));
        assert!(!pairs.contains(&("c".into(), "a".into())));
    }

    #[test]
    fn inverse_and_concat() {
        let g = chain();
        let inv = eval_path_expr(&g, &PathExpr::label("flight").inv());
        assert_eq!(inv, Pairs::from([("a".into(), "c".into())]));
        let two = eval_path_expr(&g, &PathExpr::label("bus").then(PathExpr::label("flight")));
        assert_eq!(two, Pairs::from([("b".into(), "a".into())]));
    }

    #[test]
    fn rpq_cases() {
        let g = chain();
        let bus_star = PathExpr::label("bus").star();
        let q = Rpq { x: Term::constant("a"), r: bus_star.clone(), y: Term::constant("a") };
        assert_eq!(eval_rpq(&g, &q), vec![Mapping::new()]);
        let q = Rpq { x: Term::constant("a"), r: bus_star.clone(), y: Term::var("z") };
        assert_eq!(eval_rpq(&g, &q).len(), 3);
        let q = Rpq { x: Term::var("z"), r: bus_star.clone(), y: Term::var("z") };
        assert_eq!(eval_rpq(&g, &q).len(), 3);
        let none = Graph::from_triples([("a", "bus", "b")]);
        let ff = PathExpr::label("flight").then(PathExpr::label("flight"));
        assert!(eval_rpq(&none, &Rpq { x: Term::constant("a"), r: ff, y: Term::var("z") }).is_empty());
    }

    #[test]
    fn enumeration_respects_direction() {
        let g = chain();
        let paths = enumerate_paths(&g, "a", &PathExpr::label("flight").inv(), None, 2);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0][0].to, "c");
        assert!(!paths[0][0].forward);
        let paths = enumerate_paths(&g, "a", &PathExpr::label("bus").star(), Some("c"), 3);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 2);
    }
}
