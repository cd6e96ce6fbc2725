//! Rules `B ⇒ H` over basic graph patterns, least-model materialization,
//! ground entailment and consistency checking.
//!
//! ```text
//! (rule (bgp (?x "type" ?c) (?c "subc. of" ?d)) => (bgp (?x "type" ?d)))
//! (rule (bgp (?x ?p ?y) (?x ?p ?z)) => (bgp (?y "same as" ?z)) (distinct ?y ?z))
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use kg_core::query::{eval_pattern, eval_pattern_seeded, parse_bgp, pattern_to_dsl, Mapping, Mode, Pattern, Term, TriplePattern};
use kg_core::sexpr::{parse_all, Sexp, SexpError};
use kg_core::{Edge, Graph};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("{0}")]
    Syntax(#[from] SexpError),
    #[error("unsafe rule: head variables {} do not occur in the body", .0.join(", "))]
    Unsafe(Vec<String>),
    #[error("unknown rule set `{0}` (expected rdfs or owl-subset)")]
    UnknownRuleSet(String),
    #[error("entailment target is not ground: `{0}` is an existential node")]
    NonGround(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub body: Pattern,
    pub head: Pattern,
    /// Body variables that must bind to different constants.
    pub distinct: Vec<(String, String)>,
}

impl Rule {
    pub fn new(body: Pattern, head: Pattern) -> Result<Rule, RuleError> {
        Rule::with_distinct(body, head, Vec::new())
    }

    pub fn with_distinct(body: Pattern, head: Pattern, distinct: Vec<(String, String)>) -> Result<Rule, RuleError> {
        let bound: BTreeSet<String> = body.vars().into_iter().collect();
        let mut free: Vec<String> = head.vars().into_iter().filter(|v| !bound.contains(v)).collect();
        free.extend(distinct.iter().flat_map(|(a, b)| [a, b]).filter(|v| !bound.contains(*v)).cloned());
        if !free.is_empty() {
            free.dedup();
            return Err(RuleError::Unsafe(free));
        }
        Ok(Rule { body, head, distinct })
    }

    fn admits(&self, mu: &Mapping) -> bool {
        self.distinct.iter().all(|(a, b)| mu[a] != mu[b])
    }

    fn head_edges<'a>(&'a self, mu: &'a Mapping) -> impl Iterator<Item = Edge> + 'a {
        self.head.triples.iter().map(move |t| t.apply(mu).expect("safe rules bind every head variable"))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(rule {} => {}", pattern_to_dsl(&self.body), pattern_to_dsl(&self.head))?;
        for (a, b) in &self.distinct {
            write!(f, " (distinct ?{a} ?{b})")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub name: String,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(name: &str, rules: Vec<Rule>) -> Self {
        RuleSet { name: name.to_string(), rules }
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, RuleError> {
        Ok(RuleSet::new(name, parse_rules(text)?))
    }
}

fn var_of(e: &Sexp) -> Result<String, SexpError> {
    match e.as_symbol() {
        Some(s) if s.len() > 1 && s.starts_with('?') => Ok(s[1..].to_string()),
        _ => Err(e.error("expected a variable")),
    }
}

pub fn parse_rule(e: &Sexp) -> Result<Rule, RuleError> {
    match e.as_form() {
        Some(("rule", [body, arrow, head, extra @ ..])) if arrow.as_symbol() == Some("=>") => {
            let mut distinct = Vec::new();
            for x in extra {
                match x.as_form() {
                    Some(("distinct", [a, b])) => distinct.push((var_of(a)?, var_of(b)?)),
                    _ => return Err(x.error("expected `(distinct ?a ?b)`").into()),
                }
            }
            Rule::with_distinct(parse_bgp(body)?, parse_bgp(head)?, distinct)
        }
        _ => Err(e.error("expected `(rule (bgp ...) => (bgp ...))`").into()),
    }
}

pub fn parse_rules(text: &str) -> Result<Vec<Rule>, RuleError> {
    parse_all(text)?.iter().map(parse_rule).collect()
}

/// `⋃_{μ ∈ B(G)} μ(H)`.
pub fn apply_rule(g: &Graph, r: &Rule) -> Graph {
    Graph::from_edges(
        eval_pattern(g, &r.body, Mode::Homomorphism)
            .iter()
            .filter(|mu| r.admits(mu))
            .flat_map(|mu| r.head_edges(mu).collect::<Vec<_>>()),
    )
}

/// Naive fixpoint: apply every rule to the whole graph until nothing changes.
pub fn least_model_naive(g: &Graph, rs: &RuleSet) -> Graph {
    let mut cur = g.clone();
    loop {
        let next = rs.rules.iter().fold(cur.clone(), |acc, r| acc.union(&apply_rule(&cur, r)));
        if next.len() == cur.len() {
            return cur;
        }
        cur = next;
    }
}

fn unify(t: &TriplePattern, e: &Edge) -> Option<Mapping> {
    let mut mu = Mapping::new();
    for (term, c) in [(&t.s, &e.s), (&t.p, &e.p), (&t.o, &e.o)] {
        match term {
            Term::Const(k) if k != c => return None,
            Term::Const(_) => {}
            Term::Var(v) => match mu.get(v) {
                Some(x) if x != c => return None,
                Some(_) => {}
                None => {
                    mu.insert(v.clone(), c.clone());
                }
            },
        }
    }
    Some(mu)
}

fn constant(t: &Term) -> Option<&str> {
    match t {
        Term::Const(c) => Some(c),
        Term::Var(_) => None,
    }
}

/// Head images of `r` from body solutions using at least one `delta` edge.
fn fire_on_delta(total: &Graph, delta: &Graph, r: &Rule, i: usize) -> Vec<Edge> {
    let t = &r.body.triples[i];
    let rest = Pattern::new(r.body.triples.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.clone()).collect());
    let mut out = Vec::new();
    for e in delta.matching(constant(&t.s), constant(&t.p), constant(&t.o)) {
        if let Some(seed) = unify(t, e) {
            for mu in eval_pattern_seeded(total, &rest, &seed) {
                if r.admits(&mu) {
                    out.extend(r.head_edges(&mu));
                }
            }
        }
    }
    out
}

/// `R*(G)` by semi-naive iteration: each round only considers body matches
/// that use an edge derived in the previous round. Rounds fan out over
/// (rule, body triple) pairs on the rayon pool; the result is a set, so it
/// does not depend on scheduling.
pub fn least_model(g: &Graph, rs: &RuleSet) -> Graph {
    let facts: Vec<Edge> = rs
        .rules
        .iter()
        .filter(|r| r.body.triples.is_empty())
        .flat_map(|r| r.head_edges(&Mapping::new()).collect::<Vec<_>>())
        .collect();
    let mut total = g.union(&Graph::from_edges(facts.iter().cloned()));
    let mut delta = total.clone();
    let jobs: Vec<(&Rule, usize)> =
        rs.rules.iter().flat_map(|r| (0..r.body.triples.len()).map(move |i| (r, i))).collect();
    loop {
        let derived: Vec<Vec<Edge>> = jobs.par_iter().map(|(r, i)| fire_on_delta(&total, &delta, r, *i)).collect();
        let known: HashSet<&Edge> = total.edges().iter().collect();
        let fresh: BTreeSet<Edge> = derived.into_iter().flatten().filter(|e| !known.contains(e)).collect();
        if fresh.is_empty() {
            return total;
        }
        delta = Graph::from_edges(fresh);
        total = total.union(&delta);
    }
}

/// `g1` entails ground `g2` under `rs` iff `g2 ⊆ R*(g1)`.
pub fn entails_ground(g1: &Graph, g2: &Graph, rs: &RuleSet) -> Result<bool, RuleError> {
    if let Some(n) = g2.nodes().iter().chain(g2.labels()).find(|n| n.starts_with("_:")) {
        return Err(RuleError::NonGround(n.clone()));
    }
    let model = least_model(g1, rs);
    Ok(g2.edges().iter().all(|e| model.contains_edge(e)))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub feature: String,
    pub witnesses: Vec<Edge>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.witnesses.iter().map(|e| format!("({} {} {})", e.s, e.p, e.o)).collect();
        write!(f, "{}\t{}", self.feature, w.join(" "))
    }
}

/// Patterns whose matches contradict a negative ontology condition.
pub fn violation_patterns() -> Vec<(&'static str, Pattern)> {
    let pats = [
        ("disjoint-class", r#"(bgp (?c "disj. c." ?d) (?x "type" ?c) (?x "type" ?d))"#),
        ("complement", r#"(bgp (?c "comp." ?d) (?x "type" ?c) (?x "type" ?d))"#),
        ("disjoint-property", r#"(bgp (?p "disj. p." ?q) (?x ?p ?y) (?x ?q ?y))"#),
        ("asymmetric", r#"(bgp (?p "type" "Asymmetric") (?x ?p ?y) (?y ?p ?x))"#),
        ("irreflexive", r#"(bgp (?p "type" "Irreflexive") (?x ?p ?x))"#),
        ("negation-assertion", r#"(bgp (?n "type" "Neg") (?n "sub" ?x) (?n "pre" ?y) (?n "obj" ?z) (?x ?y ?z))"#),
        ("different-from", r#"(bgp (?x "diff. from" ?y) (?x "same as" ?y))"#),
        ("different-from", r#"(bgp (?x "diff. from" ?x))"#),
    ];
    pats.iter()
        .map(|(f, p)| (*f, parse_bgp(&kg_core::sexpr::parse_one(p).expect("valid")).expect("valid")))
        .collect()
}

/// Violations in an already materialized graph.
pub fn find_violations(model: &Graph) -> Vec<Violation> {
    let mut out = BTreeSet::new();
    for (feature, p) in violation_patterns() {
        for mu in eval_pattern(model, &p, Mode::Homomorphism) {
            let witnesses: BTreeSet<Edge> = p.apply(&mu).expect("bound").into_iter().collect();
            out.insert(Violation { feature: feature.to_string(), witnesses: witnesses.into_iter().collect() });
        }
    }
    out.into_iter().collect()
}

/// Materializes with `rs`, then reports every violation.
pub fn check_consistency(g: &Graph, rs: &RuleSet) -> Vec<Violation> {
    find_violations(&least_model(g, rs))
}

const RDFS: &str = r#"
(rule (bgp (?x "type" ?c) (?c "subc. of" ?d)) => (bgp (?x "type" ?d)))
(rule (bgp (?c "subc. of" ?d) (?d "subc. of" ?e)) => (bgp (?c "subc. of" ?e)))
(rule (bgp (?x ?p ?y) (?p "subp. of" ?q)) => (bgp (?x ?q ?y)))
(rule (bgp (?p "subp. of" ?q) (?q "subp. of" ?r)) => (bgp (?p "subp. of" ?r)))
(rule (bgp (?x ?p ?y) (?p "domain" ?c)) => (bgp (?x "type" ?c)))
(rule (bgp (?x ?p ?y) (?p "range" ?c)) => (bgp (?y "type" ?c)))
"#;

const OWL_EXTRA: &str = r#"
(rule (bgp (?p "equiv. p." ?q) (?x ?p ?y)) => (bgp (?x ?q ?y)))
(rule (bgp (?p "equiv. p." ?q) (?x ?q ?y)) => (bgp (?x ?p ?y)))
(rule (bgp (?c "equiv. c." ?d) (?x "type" ?c)) => (bgp (?x "type" ?d)))
(rule (bgp (?c "equiv. c." ?d) (?x "type" ?d)) => (bgp (?x "type" ?c)))
(rule (bgp (?p "inv. of" ?q) (?x ?p ?y)) => (bgp (?y ?q ?x)))
(rule (bgp (?p "inv. of" ?q) (?y ?q ?x)) => (bgp (?x ?p ?y)))
(rule (bgp (?p "type" "Symmetric") (?x ?p ?y)) => (bgp (?y ?p ?x)))
(rule (bgp (?p "type" "Transitive") (?x ?p ?y) (?y ?p ?z)) => (bgp (?x ?p ?z)))
(rule (bgp (?x "same as" ?y)) => (bgp (?y "same as" ?x)))
(rule (bgp (?x "same as" ?y) (?y "same as" ?z)) => (bgp (?x "same as" ?z)) (distinct ?x ?z))
(rule (bgp (?p "type" "Functional") (?x ?p ?y1) (?x ?p ?y2)) => (bgp (?y1 "same as" ?y2)) (distinct ?y1 ?y2))
(rule (bgp (?p "type" "Inv. Functional") (?x1 ?p ?y) (?x2 ?p ?y)) => (bgp (?x1 "same as" ?x2)) (distinct ?x1 ?x2))
"#;

/// `(?head label ?l1) (?l1 "first" ?m1) (?l1 "rest" ?l2) ... (?ln "rest" "nil")`
/// for an exact list length, or only up to the k-th `first` for membership.
fn list_triples(head: &str, label: &str, member: &str, n: usize, exact: bool) -> String {
    let mut out = format!(r#"({head} "{label}" ?l1)"#);
    for i in 1..=n {
        if exact || i == n {
            out.push_str(&format!(r#" (?l{i} "first" ?{member}{i})"#));
        }
        if i < n {
            out.push_str(&format!(r#" (?l{i} "rest" ?l{})"#, i + 1));
        } else if exact {
            out.push_str(&format!(r#" (?l{i} "rest" "nil")"#));
        }
    }
    out
}

/// Chain, intersection, union and key rules for lists of bounded length.
fn unrolled_rules() -> String {
    let mut out = String::new();
    for n in 2..=4 {
        let list = list_triples("?p", "chain", "q", n, true);
        let mut path = String::new();
        for i in 1..=n {
            let from = if i == 1 { "?x".to_string() } else { format!("?y{}", i - 1) };
            let to = if i == n { "?z".to_string() } else { format!("?y{i}") };
            path.push_str(&format!(" ({from} ?q{i} {to})"));
        }
        out.push_str(&format!("(rule (bgp {list}{path}) => (bgp (?x ?p ?z)))\n"));

        let list = list_triples("?c", "int.", "c", n, true);
        let types: String = (1..=n).map(|i| format!(r#" (?x "type" ?c{i})"#)).collect();
        out.push_str(&format!(r#"(rule (bgp {list}{types}) => (bgp (?x "type" ?c)))"#));
        out.push('\n');
    }
    for k in 1..=4 {
        let list = list_triples("?c", "int.", "c", k, false);
        out.push_str(&format!(r#"(rule (bgp {list} (?x "type" ?c)) => (bgp (?x "type" ?c{k})))"#));
        out.push('\n');
        let list = list_triples("?c", "union", "c", k, false);
        out.push_str(&format!(r#"(rule (bgp {list} (?x "type" ?c{k})) => (bgp (?x "type" ?c)))"#));
        out.push('\n');
    }
    for n in 1..=3 {
        let list = list_triples("?c", "key", "p", n, true);
        let vals: String = (1..=n).map(|i| format!(" (?x1 ?p{i} ?v{i}) (?x2 ?p{i} ?v{i})")).collect();
        out.push_str(&format!(
            r#"(rule (bgp {list} (?x1 "type" ?c) (?x2 "type" ?c){vals}) => (bgp (?x1 "same as" ?x2)) (distinct ?x1 ?x2))"#
        ));
        out.push('\n');
    }
    out
}

/// `rdfs`: sub-class, sub-property, domain and range rules. `owl-subset`
/// adds equivalence, inverse, symmetric, transitive, chain, intersection,
/// union and identity rules.
pub fn builtin_ruleset(name: &str) -> Result<RuleSet, RuleError> {
    let text = match name {
        "rdfs" => RDFS.to_string(),
        "owl-subset" => format!("{RDFS}{OWL_EXTRA}{}", unrolled_rules()),
        other => return Err(RuleError::UnknownRuleSet(other.to_string())),
    };
    RuleSet::parse(name, &text)
}
