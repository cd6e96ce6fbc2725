//! Annotation domains (idempotent commutative semirings), annotated graphs and
//! annotated basic-pattern evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use kg_core::query::{eval_pattern, Mapping, Mode, Pattern};
use kg_core::{Edge, Graph};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("bad annotation `{value}`: {reason}")]
    Value { value: String, reason: String },
}

/// `⟨A, ⊕, ⊗, ⊥, ⊤⟩`.
pub trait AnnotationDomain: Sync {
    type Value: Clone + Debug + Send + Sync;

    fn join(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn meet(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn bottom(&self) -> Self::Value;
    fn top(&self) -> Self::Value;
    fn same(&self, a: &Self::Value, b: &Self::Value) -> bool;
    fn parse(&self, text: &str) -> Result<Self::Value, AnnotationError>;
    fn render(&self, a: &Self::Value) -> String;

    /// `a ≤ b` iff `a ⊕ b = b`.
    fn leq(&self, a: &Self::Value, b: &Self::Value) -> bool {
        self.same(&self.join(a, b), b)
    }
}

pub const LAST_DAY: u32 = 365;

/// Sorted, disjoint, non-adjacent closed intervals of days in `[1, 365]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntervalSet(Vec<(u32, u32)>);

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet(Vec::new())
    }

    pub fn all() -> Self {
        IntervalSet(vec![(1, LAST_DAY)])
    }

    pub fn new<I: IntoIterator<Item = (u32, u32)>>(intervals: I) -> Result<Self, String> {
        let mut v: Vec<(u32, u32)> = intervals.into_iter().collect();
        if let Some(&(a, b)) = v.iter().find(|&&(a, b)| a > b || a < 1 || b > LAST_DAY) {
            return Err(format!("[{a},{b}] is not an interval within [1,{LAST_DAY}]"));
        }
        v.sort();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match out.last_mut() {
                Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Ok(IntervalSet(out))
    }

    pub fn intervals(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_normal(&self) -> bool {
        self.0.iter().all(|&(a, b)| 1 <= a && a <= b && b <= LAST_DAY)
            && self.0.windows(2).all(|w| w[0].1 + 1 < w[1].0)
    }

    pub fn contains(&self, day: u32) -> bool {
        self.0.iter().any(|&(a, b)| a <= day && day <= b)
    }

    pub fn union(&self, other: &Self) -> Self {
        IntervalSet::new(self.0.iter().chain(&other.0).copied()).expect("inputs are normal")
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            let (a1, b1) = self.0[i];
            let (a2, b2) = other.0[j];
            let (lo, hi) = (a1.max(a2), b1.min(b2));
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet(out)
    }
}

/// Day-of-year sets: `⊕ = ∪`, `⊗ = ∩`, `⊥ = ∅`, `⊤ = [1, 365]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct TemporalDomain;

pub fn temporal_domain() -> TemporalDomain {
    TemporalDomain
}

impl AnnotationDomain for TemporalDomain {
    type Value = IntervalSet;

    fn join(&self, a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
        a.union(b)
    }
    fn meet(&self, a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
        a.intersection(b)
    }
    fn bottom(&self) -> IntervalSet {
        IntervalSet::empty()
    }
    fn top(&self) -> IntervalSet {
        IntervalSet::all()
    }
    fn same(&self, a: &IntervalSet, b: &IntervalSet) -> bool {
        a == b
    }

    /// `[a,b];[c,d]`, or `{}` for the empty set.
    fn parse(&self, text: &str) -> Result<IntervalSet, AnnotationError> {
        let err = |reason: String| AnnotationError::Value { value: text.to_string(), reason };
        let text = text.trim();
        if text == "{}" {
            return Ok(IntervalSet::empty());
        }
        let mut intervals = Vec::new();
        for part in text.split(';') {
            let inner = part
                .trim()
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| err(format!("expected `[a,b]`, found `{part}`")))?;
            let (a, b) = inner.split_once(',').ok_or_else(|| err(format!("expected `[a,b]`, found `{part}`")))?;
            let day = |s: &str| s.trim().parse::<u32>().map_err(|_| err(format!("`{s}` is not a day number")));
            intervals.push((day(a)?, day(b)?));
        }
        IntervalSet::new(intervals).map_err(err)
    }

    fn render(&self, a: &IntervalSet) -> String {
        if a.is_empty() {
            return "{}".to_string();
        }
        a.0.iter().map(|(x, y)| format!("[{x},{y}]")).collect::<Vec<_>>().join(";")
    }
}

pub const FUZZY_TOLERANCE: f64 = 1e-12;

/// Degrees in `[0, 1]`: `⊕ = max`, `⊗ = min`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FuzzyDomain;

pub fn fuzzy_domain() -> FuzzyDomain {
    FuzzyDomain
}

impl AnnotationDomain for FuzzyDomain {
    type Value = f64;

    fn join(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn meet(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
    fn bottom(&self) -> f64 {
        0.0
    }
    fn top(&self) -> f64 {
        1.0
    }
    fn same(&self, a: &f64, b: &f64) -> bool {
        (a - b).abs() <= FUZZY_TOLERANCE
    }
    fn parse(&self, text: &str) -> Result<f64, AnnotationError> {
        let err = |reason: &str| AnnotationError::Value { value: text.to_string(), reason: reason.to_string() };
        let x: f64 = text.trim().parse().map_err(|_| err("not a decimal"))?;
        if (0.0..=1.0).contains(&x) {
            Ok(x)
        } else {
            Err(err("outside [0,1]"))
        }
    }
    fn render(&self, a: &f64) -> String {
        format!("{a}")
    }
}

/// Names of the checked semiring laws, in checking order.
pub const LAWS: [&str; 10] = [
    "join associativity",
    "join identity",
    "join commutativity",
    "meet associativity",
    "meet identity",
    "left distributivity",
    "right distributivity",
    "meet annihilation",
    "meet commutativity",
    "join idempotence",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawFailure {
    pub law: &'static str,
    pub values: Vec<String>,
}

/// Evaluates every law of [`LAWS`] over all (ordered) triples of samples and
/// returns the first counterexample.
pub fn check_domain_axioms<D: AnnotationDomain>(d: &D, samples: &[D::Value]) -> Result<(), LawFailure> {
    let (bot, top) = (d.bottom(), d.top());
    let fail = |law: &'static str, vs: &[&D::Value]| LawFailure { law, values: vs.iter().map(|v| d.render(v)).collect() };
    for a in samples {
        for b in samples {
            for c in samples {
                let checks: [(&'static str, bool); 7] = [
                    (LAWS[0], d.same(&d.join(&d.join(a, b), c), &d.join(a, &d.join(b, c)))),
                    (LAWS[2], d.same(&d.join(a, b), &d.join(b, a))),
                    (LAWS[3], d.same(&d.meet(&d.meet(a, b), c), &d.meet(a, &d.meet(b, c)))),
                    (LAWS[5], d.same(&d.meet(a, &d.join(b, c)), &d.join(&d.meet(a, b), &d.meet(a, c)))),
                    (LAWS[6], d.same(&d.meet(&d.join(a, b), c), &d.join(&d.meet(a, c), &d.meet(b, c)))),
                    (LAWS[8], d.same(&d.meet(a, b), &d.meet(b, a))),
                    (LAWS[1], d.same(&d.join(&bot, a), a) && d.same(&d.join(a, &bot), a)),
                ];
                if let Some((law, _)) = checks.iter().find(|(_, ok)| !ok) {
                    return Err(fail(law, &[a, b, c]));
                }
            }
        }
    }
    for a in samples {
        if !(d.same(&d.meet(&top, a), a) && d.same(&d.meet(a, &top), a)) {
            return Err(fail(LAWS[4], &[a]));
        }
        if !(d.same(&d.meet(&bot, a), &bot) && d.same(&d.meet(a, &bot), &bot)) {
            return Err(fail(LAWS[7], &[a]));
        }
        if !d.same(&d.join(a, a), a) {
            return Err(fail(LAWS[9], &[a]));
        }
    }
    Ok(())
}

/// Edge-labelled graph with one annotation per edge.
#[derive(Clone, Debug)]
pub struct AnnotatedGraph<V> {
    pub edges: BTreeMap<Edge, V>,
}

impl<V: Clone + Debug + Send + Sync> AnnotatedGraph<V> {
    /// Repeated edges are combined with `⊕`.
    pub fn new<D, I>(d: &D, edges: I) -> Self
    where
        D: AnnotationDomain<Value = V>,
        I: IntoIterator<Item = (Edge, V)>,
    {
        let mut out: BTreeMap<Edge, V> = BTreeMap::new();
        for (e, a) in edges {
            let merged = match out.get(&e) {
                Some(prev) => d.join(prev, &a),
                None => a,
            };
            out.insert(e, merged);
        }
        AnnotatedGraph { edges: out }
    }

    /// `s<TAB>p<TAB>o<TAB>annotation`; blank lines and `#` comments skipped.
    pub fn parse_tsv<D: AnnotationDomain<Value = V>>(d: &D, text: &str) -> Result<Self, AnnotationError> {
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| AnnotationError::Parse { line: i + 1, reason };
            match line.split('\t').collect::<Vec<_>>()[..] {
                [s, p, o, a] if !s.is_empty() && !p.is_empty() && !o.is_empty() => {
                    let a = d.parse(a).map_err(|e| err(e.to_string()))?;
                    edges.push((Edge::new(s, p, o), a));
                }
                _ => return Err(err("expected `s<TAB>p<TAB>o<TAB>annotation`".into())),
            }
        }
        Ok(AnnotatedGraph::new(d, edges))
    }

    pub fn to_tsv<D: AnnotationDomain<Value = V>>(&self, d: &D) -> String {
        self.edges.iter().map(|(e, a)| format!("{e}\t{}\n", d.render(a))).collect()
    }

    /// The underlying graph without annotations.
    pub fn plain(&self) -> Graph {
        Graph::from_edges(self.edges.keys().cloned())
    }
}

/// Per solution the `⊗` of its matched edges' annotations; solutions with
/// equal projections merge by `⊕`. Rows annotated `⊥` are dropped when
/// `drop_bottom` is set. Rows come back sorted by their projected bindings.
pub fn eval_annotated<D: AnnotationDomain>(
    g: &AnnotatedGraph<D::Value>,
    q: &Pattern,
    project: &[String],
    d: &D,
    drop_bottom: bool,
) -> Vec<(Mapping, D::Value)> {
    let plain = g.plain();
    let mut grouped: BTreeMap<Mapping, D::Value> = BTreeMap::new();
    for mu in eval_pattern(&plain, q, Mode::Homomorphism) {
        let matched: BTreeSet<Edge> = q.apply(&mu).expect("solutions bind every variable").into_iter().collect();
        let a = matched.iter().fold(d.top(), |acc, e| d.meet(&acc, &g.edges[e]));
        let key: Mapping = mu.into_iter().filter(|(k, _)| project.contains(k)).collect();
        let merged = match grouped.get(&key) {
            Some(prev) => d.join(prev, &a),
            None => a,
        };
        grouped.insert(key, merged);
    }
    let bot = d.bottom();
    grouped.into_iter().filter(|(_, a)| !(drop_bottom && d.same(a, &bot))).collect()
}

/// TSV with the projected columns followed by `annotation`.
pub fn annotated_rows_to_tsv<D: AnnotationDomain>(d: &D, vars: &[String], rows: &[(Mapping, D::Value)]) -> String {
    let mut out: Vec<String> = vars.iter().map(|v| format!("?{v}")).collect();
    out.push("annotation".into());
    let mut text = out.join("\t") + "\n";
    for (mu, a) in rows {
        let mut fields: Vec<String> = vars.iter().map(|v| mu.get(v).cloned().unwrap_or_default()).collect();
        fields.push(d.render(a));
        text.push_str(&fields.join("\t"));
        text.push('\n');
    }
    text
}
