//! Graph pattern evaluation, the algebra over mappings, and regular path
//! queries.

mod algebra;
mod bgp;
mod dsl;
mod path;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::sexpr::SexpError;

pub use algebra::{eval_algebra, EvalOptions};
pub use bgp::{eval_pattern, eval_pattern_seeded};
pub use dsl::{parse_bgp, parse_condition, parse_path_expr, parse_query, parse_term, pattern_to_dsl};
pub use path::{enumerate_paths, eval_path_expr, eval_rpq, PathStep};

/// A partial map from variable names (without the `?`) to constants.
pub type Mapping = BTreeMap<String, String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SexpError),
    #[error("{0}")]
    Static(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.trim_start_matches('?').to_string())
    }

    pub fn constant(c: &str) -> Term {
        Term::Const(c.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    /// The constant this term denotes under `mu`, if any.
    pub fn resolve<'a>(&'a self, mu: &'a Mapping) -> Option<&'a str> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(v) => mu.get(v).map(String::as_str),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{}", crate::sexpr::quote(c)),
            Term::Var(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl TriplePattern {
    pub fn new(s: Term, p: Term, o: Term) -> Self {
        TriplePattern { s, p, o }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.s, &self.p, &self.o]
    }

    /// Image of the triple under `mu`, if every variable is bound.
    pub fn apply(&self, mu: &Mapping) -> Option<crate::Edge> {
        Some(crate::Edge::new(
            self.s.resolve(mu)?,
            self.p.resolve(mu)?,
            self.o.resolve(mu)?,
        ))
    }
}

/// A basic graph pattern. Node and label terms are those used by its triples.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub triples: Vec<TriplePattern>,
}

impl Pattern {
    pub fn new(triples: Vec<TriplePattern>) -> Self {
        Pattern { triples }
    }

    /// Variables in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in &self.triples {
            for v in t.terms().into_iter().filter_map(Term::as_var) {
                if seen.insert(v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    pub fn node_vars(&self) -> BTreeSet<&str> {
        self.triples
            .iter()
            .flat_map(|t| [&t.s, &t.o])
            .filter_map(Term::as_var)
            .collect()
    }

    pub fn edge_vars(&self) -> BTreeSet<&str> {
        self.triples.iter().filter_map(|t| t.p.as_var()).collect()
    }

    /// Image of the pattern under a mapping binding all its variables.
    pub fn apply(&self, mu: &Mapping) -> Option<Vec<crate::Edge>> {
        self.triples.iter().map(|t| t.apply(mu)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Homomorphism,
    /// Distinct edge (predicate-position) variables bind distinct constants.
    EdgeIso,
    /// Distinct node variables and distinct edge variables bind distinct constants.
    NodeEdgeIso,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "homomorphism" => Ok(Mode::Homomorphism),
            "edge-iso" => Ok(Mode::EdgeIso),
            "node-edge-iso" => Ok(Mode::NodeEdgeIso),
            _ => Err(format!("unknown mode `{s}` (homomorphism, edge-iso, node-edge-iso)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Semantics {
    Bag,
    #[default]
    Set,
}

impl std::str::FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bag" => Ok(Semantics::Bag),
            "set" => Ok(Semantics::Set),
            _ => Err(format!("unknown semantics `{s}` (bag, set)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Eq(Term, Term),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    /// Equality against an unbound variable is false.
    pub fn holds(&self, mu: &Mapping) -> bool {
        match self {
            Condition::Eq(a, b) => match (a.resolve(mu), b.resolve(mu)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            Condition::And(a, b) => a.holds(mu) && b.holds(mu),
            Condition::Or(a, b) => a.holds(mu) || b.holds(mu),
            Condition::Not(a) => !a.holds(mu),
        }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        match self {
            Condition::Eq(a, b) => [a, b].into_iter().filter_map(Term::as_var).collect(),
            Condition::And(a, b) | Condition::Or(a, b) => a.vars().union(&b.vars()).copied().collect(),
            Condition::Not(a) => a.vars(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathExpr {
    Label(String),
    Inverse(Box<PathExpr>),
    Star(Box<PathExpr>),
    Concat(Box<PathExpr>, Box<PathExpr>),
    Alt(Box<PathExpr>, Box<PathExpr>),
}

impl PathExpr {
    pub fn label(l: &str) -> PathExpr {
        PathExpr::Label(l.to_string())
    }

    pub fn inv(self) -> PathExpr {
        PathExpr::Inverse(Box::new(self))
    }

    pub fn star(self) -> PathExpr {
        PathExpr::Star(Box::new(self))
    }

    pub fn then(self, next: PathExpr) -> PathExpr {
        PathExpr::Concat(Box::new(self), Box::new(next))
    }

    pub fn or(self, other: PathExpr) -> PathExpr {
        PathExpr::Alt(Box::new(self), Box::new(other))
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathExpr::Label(l) => write!(f, "{}", crate::sexpr::quote(l)),
            PathExpr::Inverse(r) => write!(f, "(inv {r})"),
            PathExpr::Star(r) => write!(f, "(star {r})"),
            PathExpr::Concat(a, b) => write!(f, "(seq {a} {b})"),
            PathExpr::Alt(a, b) => write!(f, "(alt {a} {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rpq {
    pub x: Term,
    pub r: PathExpr,
    pub y: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraExpr {
    Base(Pattern),
    Project(Vec<String>, Box<AlgebraExpr>),
    Select(Condition, Box<AlgebraExpr>),
    Join(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Union(Box<AlgebraExpr>, Box<AlgebraExpr>),
    Minus(Box<AlgebraExpr>, Box<AlgebraExpr>),
    AntiJoin(Box<AlgebraExpr>, Box<AlgebraExpr>),
    LeftJoin(Box<AlgebraExpr>, Box<AlgebraExpr>),
    PathAtom(Rpq),
}

impl AlgebraExpr {
    /// Static variable set `var(Q)` in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        fn merge(a: Vec<String>, b: Vec<String>) -> Vec<String> {
            let mut out = a;
            for v in b {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            out
        }
        match self {
            AlgebraExpr::Base(p) => p.vars(),
            AlgebraExpr::Project(vs, _) => vs.clone(),
            AlgebraExpr::Select(_, e) => e.vars(),
            AlgebraExpr::Join(a, b) | AlgebraExpr::Union(a, b) | AlgebraExpr::LeftJoin(a, b) => {
                merge(a.vars(), b.vars())
            }
            AlgebraExpr::Minus(a, _) | AlgebraExpr::AntiJoin(a, _) => a.vars(),
            AlgebraExpr::PathAtom(q) => merge(
                q.x.as_var().map(str::to_string).into_iter().collect(),
                q.y.as_var().map(str::to_string).into_iter().collect(),
            ),
        }
    }

    /// Rejects projections and selections over variables the child cannot bind.
    pub fn check(&self) -> Result<(), QueryError> {
        match self {
            AlgebraExpr::Base(_) | AlgebraExpr::PathAtom(_) => Ok(()),
            AlgebraExpr::Project(vs, e) => {
                let inner = e.vars();
                if let Some(v) = vs.iter().find(|v| !inner.contains(v)) {
                    return Err(QueryError::Static(format!("projected variable ?{v} is not bound by its operand")));
                }
                e.check()
            }
            AlgebraExpr::Select(c, e) => {
                let inner = e.vars();
                if let Some(v) = c.vars().into_iter().find(|v| !inner.iter().any(|w| w == v)) {
                    return Err(QueryError::Static(format!("filter variable ?{v} is not bound by its operand")));
                }
                e.check()
            }
            AlgebraExpr::Join(a, b)
            | AlgebraExpr::Union(a, b)
            | AlgebraExpr::Minus(a, b)
            | AlgebraExpr::AntiJoin(a, b)
            | AlgebraExpr::LeftJoin(a, b) => {
                a.check()?;
                b.check()
            }
        }
    }
}

/// Whether two mappings agree on their shared variables.
pub fn compatible(a: &Mapping, b: &Mapping) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().all(|(k, v)| large.get(k).is_none_or(|w| w == v))
}

/// Sorts rows lexicographically by the given columns, unbound first.
pub fn sort_rows(vars: &[String], rows: &mut [Mapping]) {
    rows.sort_by(|a, b| {
        let ka = vars.iter().map(|v| a.get(v));
        let kb = vars.iter().map(|v| b.get(v));
        ka.cmp(kb).then_with(|| a.cmp(b))
    });
}

/// TSV with a `?var` header; unbound variables render as empty fields.
pub fn to_tsv(vars: &[String], rows: &[Mapping]) -> String {
    let mut out = vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
    out.push('\n');
    for mu in rows {
        let line: Vec<&str> = vars.iter().map(|v| mu.get(v).map_or("", String::as_str)).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}
