//! Shapes schemas: shape expressions, total shapes maps and target validation.
//!
//! Negation is stratified. Labels are grouped into strongly connected
//! components of the reference graph; a component containing a negative
//! reference is rejected, and the remaining components are evaluated bottom-up,
//! each by least-fixpoint iteration from the all-zero map.
//!
//! ```text
//! (schema (shape Name [(extends Parent) ...] φ) ...)
//! φ ::= true | (in "c" ...) | (cond name) | (and φ ...) | (or φ ...) | (not φ)
//!     | (ref Label) | (count "p" φ min max|*) | (closed "p" ...)
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use kg_core::sexpr::{parse_one, Sexp, SexpError};
use kg_core::Graph;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShapesError {
    #[error("{0}")]
    Syntax(#[from] SexpError),
    #[error("shape `{from}` references undefined label `{to}`")]
    UndefinedLabel { from: String, to: String },
    #[error("schema is not stratified: negation through the cycle {}", .cycle.join(" -> "))]
    NotStratified { cycle: Vec<String> },
    #[error("target label `{0}` is not defined by the schema")]
    UnknownTargetLabel(String),
    #[error("targets line {line}: {reason}")]
    Target { line: usize, reason: String },
}

/// Named node predicates usable under `(cond ...)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Cond {
    Gt(f64),
    Lt(f64),
    Ge(f64),
    Le(f64),
    String,
    Int,
    Float,
    Boolean,
    DateTime,
}

impl Cond {
    pub fn parse(name: &str) -> Option<Cond> {
        let num = |rest: &str| parse_float(rest);
        Some(match name {
            "string" => Cond::String,
            "int" => Cond::Int,
            "float" => Cond::Float,
            "boolean" => Cond::Boolean,
            "dateTime" => Cond::DateTime,
            _ if name.starts_with(">=") => Cond::Ge(num(&name[2..])?),
            _ if name.starts_with("<=") => Cond::Le(num(&name[2..])?),
            _ if name.starts_with('>') => Cond::Gt(num(&name[1..])?),
            _ if name.starts_with('<') => Cond::Lt(num(&name[1..])?),
            _ => return None,
        })
    }

    pub fn holds(&self, v: &str) -> bool {
        match self {
            Cond::String => true,
            Cond::Int => is_int(v),
            Cond::Float => parse_float(v).is_some(),
            Cond::Boolean => v == "true" || v == "false",
            Cond::DateTime => is_date_time(v),
            Cond::Gt(n) => parse_float(v).is_some_and(|x| x > *n),
            Cond::Lt(n) => parse_float(v).is_some_and(|x| x < *n),
            Cond::Ge(n) => parse_float(v).is_some_and(|x| x >= *n),
            Cond::Le(n) => parse_float(v).is_some_and(|x| x <= *n),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Gt(n) => write!(f, ">{n}"),
            Cond::Lt(n) => write!(f, "<{n}"),
            Cond::Ge(n) => write!(f, ">={n}"),
            Cond::Le(n) => write!(f, "<={n}"),
            Cond::String => f.write_str("string"),
            Cond::Int => f.write_str("int"),
            Cond::Float => f.write_str("float"),
            Cond::Boolean => f.write_str("boolean"),
            Cond::DateTime => f.write_str("dateTime"),
        }
    }
}

fn is_int(v: &str) -> bool {
    let digits = v.strip_prefix(['+', '-']).unwrap_or(v);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Decimal or scientific literal; rejects `inf`/`NaN` spellings.
fn parse_float(v: &str) -> Option<f64> {
    if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
        return None;
    }
    v.parse().ok()
}

/// `YYYY-MM-DD`, optionally followed by `T` or a space and `hh:mm[:ss]`.
fn is_date_time(v: &str) -> bool {
    let num = |s: &str, lo: u32, hi: u32| {
        s.bytes().all(|b| b.is_ascii_digit()) && s.parse::<u32>().is_ok_and(|n| (lo..=hi).contains(&n))
    };
    let (date, time) = match v.find(['T', ' ']) {
        Some(i) => (&v[..i], Some(&v[i + 1..])),
        None => (v, None),
    };
    let d: Vec<&str> = date.split('-').collect();
    let date_ok = d.len() == 3
        && d[0].len() == 4
        && d[1].len() == 2
        && d[2].len() == 2
        && num(d[0], 0, 9999)
        && num(d[1], 1, 12)
        && num(d[2], 1, 31);
    let time_ok = time.is_none_or(|t| {
        let t: Vec<&str> = t.split(':').collect();
        (t.len() == 2 || t.len() == 3)
            && t.iter().all(|p| p.len() == 2)
            && num(t[0], 0, 23)
            && num(t[1], 0, 59)
            && t.get(2).is_none_or(|s| num(s, 0, 60))
    });
    date_ok && time_ok
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    True,
    InSet(BTreeSet<String>),
    Cond(Cond),
    And(Box<Shape>, Box<Shape>),
    Not(Box<Shape>),
    Ref(String),
    Qualified { p: String, shape: Box<Shape>, min: usize, max: Option<usize> },
    /// Only the listed outgoing labels are allowed; expanded against the
    /// graph's labels before evaluation.
    Closed(BTreeSet<String>),
}

impl Shape {
    pub fn and(a: Shape, b: Shape) -> Shape {
        Shape::And(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Shape) -> Shape {
        Shape::Not(Box::new(a))
    }

    pub fn or(a: Shape, b: Shape) -> Shape {
        Shape::not(Shape::and(Shape::not(a), Shape::not(b)))
    }

    pub fn count(p: &str, shape: Shape, min: usize, max: Option<usize>) -> Shape {
        Shape::Qualified { p: p.to_string(), shape: Box::new(shape), min, max }
    }

    /// Replaces every `Closed` with `Qualified(q, True, 0, 0)` for each label
    /// of `labels` outside the allowed set.
    pub fn expand_closed(&self, labels: &BTreeSet<String>) -> Shape {
        match self {
            Shape::Closed(allowed) => labels
                .iter()
                .filter(|q| !allowed.contains(*q))
                .map(|q| Shape::count(q, Shape::True, 0, Some(0)))
                .reduce(Shape::and)
                .unwrap_or(Shape::True),
            Shape::And(a, b) => Shape::and(a.expand_closed(labels), b.expand_closed(labels)),
            Shape::Not(a) => Shape::not(a.expand_closed(labels)),
            Shape::Qualified { p, shape, min, max } => Shape::count(p, shape.expand_closed(labels), *min, *max),
            other => other.clone(),
        }
    }

    /// Referenced labels with their polarity (`true` = negative). A reference
    /// under a bounded count stays negative whatever encloses the count.
    fn refs(&self, negated: bool, bounded: bool, out: &mut BTreeSet<(String, bool)>) {
        match self {
            Shape::Ref(l) => {
                out.insert((l.clone(), negated || bounded));
            }
            Shape::And(a, b) => {
                a.refs(negated, bounded, out);
                b.refs(negated, bounded, out);
            }
            Shape::Not(a) => a.refs(!negated, bounded, out),
            Shape::Qualified { shape, max, .. } => shape.refs(negated, bounded || max.is_some(), out),
            Shape::True | Shape::InSet(_) | Shape::Cond(_) | Shape::Closed(_) => {}
        }
    }

    pub fn has_negation(&self) -> bool {
        let mut refs = BTreeSet::new();
        self.refs(false, false, &mut refs);
        refs.iter().any(|(_, neg)| *neg)
    }
}

/// `λ: S → Φ`, with labels kept in sorted order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShapesSchema {
    pub shapes: BTreeMap<String, Shape>,
}

impl ShapesSchema {
    pub fn new<I: IntoIterator<Item = (String, Shape)>>(shapes: I) -> Result<Self, ShapesError> {
        let schema = ShapesSchema { shapes: shapes.into_iter().collect() };
        schema.check_refs()?;
        Ok(schema)
    }

    pub fn labels(&self) -> impl Iterator<Item = &String> {
        self.shapes.keys()
    }

    fn check_refs(&self) -> Result<(), ShapesError> {
        for (s, phi) in &self.shapes {
            let mut refs = BTreeSet::new();
            phi.refs(false, false, &mut refs);
            if let Some((t, _)) = refs.iter().find(|(t, _)| !self.shapes.contains_key(t)) {
                return Err(ShapesError::UndefinedLabel { from: s.clone(), to: t.clone() });
            }
        }
        Ok(())
    }

    /// Strata in evaluation order: every label only depends on labels of
    /// its own stratum (positively) or of earlier strata.
    pub fn strata(&self) -> Result<Vec<Vec<String>>, ShapesError> {
        let mut dep: DiGraph<&str, bool> = DiGraph::new();
        let idx: BTreeMap<&str, NodeIndex> = self.shapes.keys().map(|s| (s.as_str(), dep.add_node(s.as_str()))).collect();
        for (s, phi) in &self.shapes {
            let mut refs = BTreeSet::new();
            phi.refs(false, false, &mut refs);
            for (t, neg) in refs {
                dep.add_edge(idx[s.as_str()], idx[t.as_str()], neg);
            }
        }
        let mut strata = Vec::new();
        for scc in tarjan_scc(&dep) {
            let members: BTreeSet<NodeIndex> = scc.iter().copied().collect();
            for e in dep.edge_indices() {
                let (a, b) = dep.edge_endpoints(e).expect("edge exists");
                if dep[e] && members.contains(&a) && members.contains(&b) {
                    return Err(ShapesError::NotStratified { cycle: cycle_through(&dep, &members, a, b) });
                }
            }
            let mut labels: Vec<String> = scc.iter().map(|n| dep[*n].to_string()).collect();
            labels.sort();
            strata.push(labels);
        }
        Ok(strata)
    }
}

/// `a -> b -> ... -> a` inside one component.
fn cycle_through(dep: &DiGraph<&str, bool>, members: &BTreeSet<NodeIndex>, a: NodeIndex, b: NodeIndex) -> Vec<String> {
    let mut prev: BTreeMap<NodeIndex, NodeIndex> = BTreeMap::new();
    let mut queue = VecDeque::from([b]);
    let mut seen = BTreeSet::from([b]);
    while let Some(u) = queue.pop_front() {
        if u == a {
            break;
        }
        for w in dep.neighbors(u) {
            if members.contains(&w) && seen.insert(w) {
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![a];
    let mut cur = a;
    while cur != b {
        cur = prev[&cur];
        path.push(cur);
    }
    path.push(a);
    path.reverse();
    path.into_iter().map(|n| dep[n].to_string()).collect()
}

/// Total map `σ: V × S → {0, 1}`, stored as the set of pairs mapped to 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShapesMap {
    pub nodes: BTreeSet<String>,
    pub labels: BTreeSet<String>,
    pub satisfied: BTreeSet<(String, String)>,
}

impl ShapesMap {
    pub fn get(&self, v: &str, s: &str) -> bool {
        self.satisfied.contains(&(v.to_string(), s.to_string()))
    }
}

/// `⟦φ⟧(v)` under `σ`.
pub fn eval_shape(g: &Graph, v: &str, phi: &Shape, sigma: &ShapesMap) -> bool {
    match phi {
        Shape::True => true,
        Shape::InSet(set) => set.contains(v),
        Shape::Cond(c) => c.holds(v),
        Shape::And(a, b) => eval_shape(g, v, a, sigma) && eval_shape(g, v, b, sigma),
        Shape::Not(a) => !eval_shape(g, v, a, sigma),
        Shape::Ref(s) => sigma.get(v, s),
        Shape::Qualified { p, shape, min, max } => {
            let n = g.out_edges(v).filter(|e| &e.p == p && eval_shape(g, &e.o, shape, sigma)).count();
            n >= *min && max.is_none_or(|m| n <= m)
        }
        Shape::Closed(allowed) => g.out_edges(v).all(|e| allowed.contains(&e.p)),
    }
}

/// The unique stratified shapes map over `V ∪ extra`.
pub fn compute_shapes_map_over(
    g: &Graph,
    schema: &ShapesSchema,
    extra: &BTreeSet<String>,
) -> Result<ShapesMap, ShapesError> {
    let strata = schema.strata()?;
    let lambda: BTreeMap<&String, Shape> =
        schema.shapes.iter().map(|(s, phi)| (s, phi.expand_closed(g.labels()))).collect();
    let mut sigma = ShapesMap {
        nodes: g.nodes().iter().chain(extra).cloned().collect(),
        labels: schema.shapes.keys().cloned().collect(),
        satisfied: BTreeSet::new(),
    };
    let nodes: Vec<String> = sigma.nodes.iter().cloned().collect();
    for stratum in strata {
        loop {
            let mut added = Vec::new();
            for s in &stratum {
                for v in &nodes {
                    if !sigma.get(v, s) && eval_shape(g, v, &lambda[s], &sigma) {
                        added.push((v.clone(), s.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            sigma.satisfied.extend(added);
        }
    }
    Ok(sigma)
}

pub fn compute_shapes_map(g: &Graph, schema: &ShapesSchema) -> Result<ShapesMap, ShapesError> {
    compute_shapes_map_over(g, schema, &BTreeSet::new())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub valid: bool,
    pub violations: Vec<(String, String)>,
}

impl Report {
    pub fn to_tsv(&self) -> String {
        self.violations.iter().map(|(v, s)| format!("{v}\t{s}\n")).collect()
    }
}

/// Checks `σ(v, s) = 1` for every target pair. Target nodes outside the
/// graph are evaluated as nodes without edges.
pub fn validate(g: &Graph, schema: &ShapesSchema, target: &[(String, String)]) -> Result<Report, ShapesError> {
    if let Some((_, s)) = target.iter().find(|(_, s)| !schema.shapes.contains_key(s)) {
        return Err(ShapesError::UnknownTargetLabel(s.clone()));
    }
    let extra: BTreeSet<String> = target.iter().map(|(v, _)| v.clone()).collect();
    let sigma = compute_shapes_map_over(g, schema, &extra)?;
    let violations: BTreeSet<(String, String)> =
        target.iter().filter(|(v, s)| !sigma.get(v, s)).cloned().collect();
    Ok(Report { valid: violations.is_empty(), violations: violations.into_iter().collect() })
}

/// `node<TAB>label` lines; blank lines and `#` comments are skipped.
pub fn parse_targets(text: &str) -> Result<Vec<(String, String)>, ShapesError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split('\t').collect::<Vec<_>>()[..] {
            [v, s] if !v.is_empty() && !s.is_empty() => out.push((v.to_string(), s.to_string())),
            _ => return Err(ShapesError::Target { line: i + 1, reason: "expected `node<TAB>label`".into() }),
        }
    }
    Ok(out)
}

pub fn parse_schema(text: &str) -> Result<ShapesSchema, ShapesError> {
    let top = parse_one(text)?;
    let defs = match top.as_form() {
        Some(("schema", defs)) => defs,
        _ => return Err(top.error("expected `(schema ...)`").into()),
    };
    let mut shapes = BTreeMap::new();
    for def in defs {
        let (name, body) = match def.as_form() {
            Some(("shape", [name, rest @ ..])) => (name, rest),
            _ => return Err(def.error("expected `(shape Name ...)`").into()),
        };
        let name = name.as_symbol().ok_or_else(|| name.error("expected a shape label"))?;
        let mut parents = Vec::new();
        let mut exprs = Vec::new();
        for item in body {
            match item.as_form() {
                Some(("extends", ps)) if !ps.is_empty() => {
                    for p in ps {
                        parents.push(p.as_symbol().ok_or_else(|| p.error("expected a shape label"))?.to_string());
                    }
                }
                _ => exprs.push(parse_shape(item)?),
            }
        }
        if exprs.len() > 1 {
            return Err(def.error("a shape takes a single expression; combine with `and`").into());
        }
        let phi = parents
            .into_iter()
            .fold(exprs.pop().unwrap_or(Shape::True), |acc, p| Shape::and(acc, Shape::Ref(p)));
        if shapes.insert(name.to_string(), phi).is_some() {
            return Err(def.error(format!("shape `{name}` defined twice")).into());
        }
    }
    ShapesSchema::new(shapes)
}

fn constant(e: &Sexp) -> Result<String, SexpError> {
    match e {
        Sexp::Str(s, _) => Ok(s.clone()),
        _ => Err(e.error("expected a quoted constant")),
    }
}

fn bound(e: &Sexp) -> Result<Option<usize>, SexpError> {
    match e.as_symbol() {
        Some("*") => Ok(None),
        Some(n) => n.parse().map(Some).map_err(|_| e.error(format!("expected a count or `*`, found `{n}`"))),
        None => Err(e.error("expected a count or `*`")),
    }
}

pub fn parse_shape(e: &Sexp) -> Result<Shape, SexpError> {
    if e.as_symbol() == Some("true") {
        return Ok(Shape::True);
    }
    let (head, args) = e.as_form().ok_or_else(|| e.error("expected a shape expression"))?;
    let nary = |combine: fn(Shape, Shape) -> Shape| -> Result<Shape, SexpError> {
        let parts = args.iter().map(parse_shape).collect::<Result<Vec<_>, _>>()?;
        parts.into_iter().reduce(combine).ok_or_else(|| e.error(format!("`{head}` needs an argument")))
    };
    match (head, args) {
        ("in", cs) => Ok(Shape::InSet(cs.iter().map(constant).collect::<Result<_, _>>()?)),
        ("cond", [name]) => {
            let n = name.as_symbol().ok_or_else(|| name.error("expected a predicate name"))?;
            Cond::parse(n).map(Shape::Cond).ok_or_else(|| name.error(format!("unknown predicate `{n}`")))
        }
        ("and", _) => nary(Shape::and),
        ("or", _) => nary(Shape::or),
        ("not", [a]) => Ok(Shape::not(parse_shape(a)?)),
        ("ref", [l]) => Ok(Shape::Ref(l.as_symbol().ok_or_else(|| l.error("expected a shape label"))?.to_string())),
        ("count", [p, phi, min, max]) => {
            let min = bound(min)?.ok_or_else(|| min.error("min must be a number"))?;
            let max_v = bound(max)?;
            if max_v.is_some_and(|m| m < min) {
                return Err(max.error("max is below min"));
            }
            Ok(Shape::count(&constant(p)?, parse_shape(phi)?, min, max_v))
        }
        ("closed", ps) => Ok(Shape::Closed(ps.iter().map(constant).collect::<Result<_, _>>()?)),
        _ => Err(e.error(format!("malformed shape expression `{head}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cond_registry() {
        assert!(Cond::parse(">5000").unwrap().holds("6000"));
        assert!(!Cond::parse(">5000").unwrap().holds("abc"));
        assert!(Cond::parse("<=2.5").unwrap().holds("2.5"));
        assert!(Cond::Int.holds("-42") && !Cond::Int.holds("4.2"));
        assert!(Cond::Float.holds("4.2e3") && !Cond::Float.holds("inf"));
        assert!(Cond::DateTime.holds("2018-03-22 12:00") && Cond::DateTime.holds("2018-03-22T12:00:59"));
        assert!(!Cond::DateTime.holds("2018-13-22") && !Cond::DateTime.holds("Santiago"));
        assert!(Cond::parse("nonsense").is_none());
    }

    #[test]
    fn barber_is_rejected_with_its_cycle() {
        let schema = parse_schema(
            r#"(schema (shape Barber (count "shave" (and (ref Person) (not (ref Barber))) 1 *))
                       (shape Person true))"#,
        )
        .unwrap();
        match compute_shapes_map(&Graph::empty(), &schema) {
            Err(ShapesError::NotStratified { cycle }) => assert_eq!(cycle, vec!["Barber", "Barber"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bounded_count_is_a_negative_dependency() {
        let schema = parse_schema(
            r#"(schema (shape A (count "p" (ref B) 0 1)) (shape B (count "q" (ref A) 1 *)))"#,
        )
        .unwrap();
        match schema.strata() {
            Err(ShapesError::NotStratified { cycle }) => {
                assert_eq!(cycle.first(), cycle.last());
                assert_eq!(cycle.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn recursive_positive_shapes_take_the_least_fixpoint() {
        // A node reaching an `end` marker through `next` edges.
        // `or` desugars through two `not`s, so the self-reference stays positive.
        let schema = parse_schema(
            r#"(schema (shape Reach (or (count "end" true 1 *) (count "next" (ref Reach) 1 *))))"#,
        )
        .unwrap();
        let g = Graph::from_triples([
            ("a", "next", "b"),
            ("b", "next", "c"),
            ("c", "end", "d"),
            ("x", "next", "y"),
            ("y", "next", "x"),
        ]);
        let sigma = compute_shapes_map(&g, &schema).unwrap();
        let reach: Vec<&str> = sigma.satisfied.iter().map(|(v, _)| v.as_str()).collect();
        assert_eq!(reach, vec!["a", "b", "c"]);
        let schema = parse_schema(r#"(schema (shape Loop (count "next" (ref Loop) 1 *)))"#).unwrap();
        // The cycle supports itself, but the least fixpoint leaves it unsatisfied.
        assert!(compute_shapes_map(&g, &schema).unwrap().satisfied.is_empty());
    }

    #[test]
    fn closed_expands_against_graph_labels() {
        let labels: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let phi = Shape::Closed(["a".to_string()].into()).expand_closed(&labels);
        assert_eq!(
            phi,
            Shape::and(Shape::count("b", Shape::True, 0, Some(0)), Shape::count("c", Shape::True, 0, Some(0)))
        );
    }

    #[test]
    fn unknown_names_are_reported() {
        assert!(matches!(parse_schema("(schema (shape A (ref B)))"), Err(ShapesError::UndefinedLabel { .. })));
        assert!(parse_schema("(schema (shape A (cond frobnicate)))").is_err());
        assert!(parse_schema(r#"(schema (shape A (count "p" true 2 1)))"#).is_err());
        let schema = parse_schema("(schema (shape A true))").unwrap();
        let target = vec![("x".to_string(), "B".to_string())];
        assert!(matches!(validate(&Graph::empty(), &schema, &target), Err(ShapesError::UnknownTargetLabel(_))));
    }

    #[test]
    fn targets_parse_with_line_numbers() {
        assert_eq!(parse_targets("# c\nx\tA\n\n").unwrap(), vec![("x".into(), "A".into())]);
        match parse_targets("x\tA\ny\n") {
            Err(ShapesError::Target { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
