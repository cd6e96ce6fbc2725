//! Top-down mining of closed Horn rules with support and PCA confidence.
//!
//! A hypothesis has a single head atom `?x p ?y` and a body of atoms with
//! constant labels. Refinement adds one body atom at a time; since every
//! refinement can only lose support, the search prunes below the support
//! threshold.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use kg_core::query::{Pattern, Term, TriplePattern};
use kg_core::{Edge, Graph};
use kg_reason::rules::Rule;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MineError {
    #[error("rule is not safe: head variables {0:?} do not occur in the body")]
    Unsafe(Vec<String>),
    #[error("invalid mining configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaClass {
    Positive,
    Negative,
    Unknown,
}

/// Classification of a candidate edge under the partial completeness
/// assumption: a missing `(s, p, o)` is negative only if `s` has some
/// `p`-edge.
pub fn pca_negatives(g: &Graph, e: &Edge) -> PcaClass {
    if g.contains_edge(e) {
        PcaClass::Positive
    } else if g.out_edges(&e.s).any(|x| x.p == e.p) {
        PcaClass::Negative
    } else {
        PcaClass::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypothesis {
    pub head: TriplePattern,
    pub body: Vec<TriplePattern>,
}

const HEAD_VARS: [&str; 2] = ["x", "y"];
const FRESH: [&str; 8] = ["z", "w", "v", "u", "t", "s", "r", "q"];

fn fresh_name(i: usize) -> String {
    FRESH.get(i).map_or_else(|| format!("z{i}"), |s| s.to_string())
}

fn atom(s: Term, p: &str, o: Term) -> TriplePattern {
    TriplePattern::new(s, Term::constant(p), o)
}

impl Hypothesis {
    /// `⇒ ?x p ?y` with an empty body.
    pub fn head_only(label: &str) -> Hypothesis {
        Hypothesis { head: atom(Term::var("x"), label, Term::var("y")), body: Vec::new() }
    }

    pub fn new(head: TriplePattern, body: Vec<TriplePattern>) -> Hypothesis {
        Hypothesis { head, body }
    }

    pub fn head_label(&self) -> &str {
        match &self.head.p {
            Term::Const(c) => c,
            Term::Var(_) => panic!("head labels are constants"),
        }
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    fn atoms(&self) -> impl Iterator<Item = &TriplePattern> {
        std::iter::once(&self.head).chain(&self.body)
    }

    /// All variables, head variables first.
    pub fn vars(&self) -> Vec<String> {
        Pattern::new(self.atoms().cloned().collect()).vars()
    }

    /// Every variable occurs in at least two atoms.
    pub fn is_closed(&self) -> bool {
        self.open_vars() == 0
    }

    /// Variables that occur in only one atom.
    pub fn open_vars(&self) -> usize {
        self.var_uses().values().filter(|&&c| c < 2).count()
    }

    /// Number of atoms each variable occurs in.
    fn var_uses(&self) -> BTreeMap<String, usize> {
        let mut count = BTreeMap::new();
        for a in self.atoms() {
            let vars: BTreeSet<&str> = [&a.s, &a.o].into_iter().filter_map(Term::as_var).collect();
            for v in vars {
                *count.entry(v.to_string()).or_default() += 1;
            }
        }
        count
    }

    pub fn is_safe(&self) -> bool {
        self.unsafe_vars().is_empty()
    }

    fn unsafe_vars(&self) -> Vec<String> {
        let body: BTreeSet<String> = Pattern::new(self.body.clone()).vars().into_iter().collect();
        Pattern::new(vec![self.head.clone()]).vars().into_iter().filter(|v| !body.contains(v)).collect()
    }

    /// The head label also occurs in the body, so derived edges can feed
    /// further derivations.
    pub fn is_recursive(&self) -> bool {
        self.body.iter().any(|a| a.p == self.head.p)
    }

    pub fn to_rule(&self) -> Result<Rule, MineError> {
        Rule::new(Pattern::new(self.body.clone()), Pattern::new(vec![self.head.clone()]))
            .map_err(|_| MineError::Unsafe(self.unsafe_vars()))
    }

    /// Normal form up to renaming of non-head variables and body order:
    /// the least atom list over all body orders, with non-head variables
    /// renamed by first appearance.
    pub fn canonical(&self) -> Hypothesis {
        let mut best: Option<Vec<TriplePattern>> = None;
        for perm in permutations(self.body.len()) {
            let mut names: BTreeMap<String, String> =
                HEAD_VARS.iter().map(|v| (v.to_string(), v.to_string())).collect();
            let mut rename = |t: &Term| match t {
                Term::Var(v) => {
                    let next = fresh_name(names.len() - HEAD_VARS.len());
                    Term::Var(names.entry(v.clone()).or_insert(next).clone())
                }
                c => c.clone(),
            };
            let mut body: Vec<TriplePattern> = perm
                .iter()
                .map(|&i| {
                    let a = &self.body[i];
                    let s = rename(&a.s);
                    let o = rename(&a.o);
                    TriplePattern::new(s, a.p.clone(), o)
                })
                .collect();
            body.sort();
            body.dedup();
            if best.as_ref().is_none_or(|b| body < *b) {
                best = Some(body);
            }
        }
        Hypothesis { head: self.head.clone(), body: best.unwrap_or_default() }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_rule() {
            Ok(r) => write!(f, "{r}"),
            Err(_) => write!(
                f,
                "(rule {} => {})",
                kg_core::query::pattern_to_dsl(&Pattern::new(self.body.clone())),
                kg_core::query::pattern_to_dsl(&Pattern::new(vec![self.head.clone()]))
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    pub support: usize,
    pub negative: usize,
    pub confidence: f64,
}

// Matching runs over interned ids; a graph of a few hundred edges is
// scored many thousands of times during a search.

type Id = u32;
/// `(s, p, o)` ids.
type Triple = (Id, Id, Id);
const UNKNOWN: Id = Id::MAX;

struct Index {
    edges: HashSet<Triple>,
    by_label: HashMap<Id, Vec<(Id, Id)>>,
    out: HashMap<(Id, Id), Vec<Id>>,
    inn: HashMap<(Id, Id), Vec<Id>>,
}

impl Index {
    fn new<I: IntoIterator<Item = Triple>>(edges: I) -> Index {
        let edges: BTreeSet<Triple> = edges.into_iter().collect();
        let mut ix = Index { edges: HashSet::new(), by_label: HashMap::new(), out: HashMap::new(), inn: HashMap::new() };
        for &(s, p, o) in &edges {
            ix.edges.insert((s, p, o));
            ix.by_label.entry(p).or_default().push((s, o));
            ix.out.entry((p, s)).or_default().push(o);
            ix.inn.entry((p, o)).or_default().push(s);
        }
        ix
    }

    fn label_edges(&self, p: Id) -> impl Iterator<Item = Triple> + '_ {
        self.by_label.get(&p).into_iter().flatten().map(move |&(s, o)| (s, p, o))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum T {
    V(usize),
    C(Id),
}

#[derive(Clone, Copy)]
struct CAtom {
    s: T,
    p: Id,
    o: T,
}

struct Compiled {
    head: CAtom,
    body: Vec<CAtom>,
    nvars: usize,
    recursive: bool,
}

struct Kb {
    node_id: HashMap<String, Id>,
    label_id: HashMap<String, Id>,
    index: Index,
}

impl Kb {
    fn new(g: &Graph) -> Kb {
        let node_id: HashMap<String, Id> = g.nodes().iter().enumerate().map(|(i, n)| (n.clone(), i as Id)).collect();
        let label_id: HashMap<String, Id> = g.labels().iter().enumerate().map(|(i, l)| (l.clone(), i as Id)).collect();
        let index = Index::new(g.edges().iter().map(|e| (node_id[&e.s], label_id[&e.p], node_id[&e.o])));
        Kb { node_id, label_id, index }
    }

    fn compile(&self, h: &Hypothesis) -> Compiled {
        let vars = h.vars();
        let term = |t: &Term| match t {
            Term::Var(v) => T::V(vars.iter().position(|x| x == v).expect("listed")),
            Term::Const(c) => T::C(self.node_id.get(c).copied().unwrap_or(UNKNOWN)),
        };
        let label = |t: &Term| match t {
            Term::Const(c) => self.label_id.get(c).copied().unwrap_or(UNKNOWN),
            Term::Var(_) => panic!("hypothesis labels are constants"),
        };
        let atom = |a: &TriplePattern| CAtom { s: term(&a.s), p: label(&a.p), o: term(&a.o) };
        Compiled { head: atom(&h.head), body: h.body.iter().map(atom).collect(), nvars: vars.len(), recursive: h.is_recursive() }
    }
}

fn value(t: T, bind: &[Option<Id>]) -> Option<Id> {
    match t {
        T::C(c) => Some(c),
        T::V(v) => bind[v],
    }
}

/// Backtracking search for homomorphisms of `atoms` into `ix` that extend
/// `bind` and avoid the edge `avoid`. `visit` returns true to stop; the
/// search returns true if it was stopped.
fn search(
    ix: &Index,
    atoms: &[CAtom],
    used: &mut [bool],
    bind: &mut [Option<Id>],
    avoid: Option<Triple>,
    visit: &mut dyn FnMut(&[Option<Id>]) -> bool,
) -> bool {
    let next = (0..atoms.len())
        .filter(|&i| !used[i])
        .max_by_key(|&i| (value(atoms[i].s, bind).is_some() as u8 + value(atoms[i].o, bind).is_some() as u8, usize::MAX - i));
    let Some(i) = next else { return visit(bind) };
    let a = atoms[i];
    used[i] = true;
    let ok = |t: Triple| avoid != Some(t);
    let mut stop = false;
    match (value(a.s, bind), value(a.o, bind)) {
        (Some(s), Some(o)) => {
            if ix.edges.contains(&(s, a.p, o)) && ok((s, a.p, o)) {
                stop = search(ix, atoms, used, bind, avoid, visit);
            }
        }
        (Some(s), None) => {
            let T::V(ov) = a.o else { unreachable!() };
            for &o in ix.out.get(&(a.p, s)).into_iter().flatten() {
                if ok((s, a.p, o)) {
                    bind[ov] = Some(o);
                    stop = search(ix, atoms, used, bind, avoid, visit);
                    bind[ov] = None;
                    if stop {
                        break;
                    }
                }
            }
        }
        (None, Some(o)) => {
            let T::V(sv) = a.s else { unreachable!() };
            for &s in ix.inn.get(&(a.p, o)).into_iter().flatten() {
                if ok((s, a.p, o)) {
                    bind[sv] = Some(s);
                    stop = search(ix, atoms, used, bind, avoid, visit);
                    bind[sv] = None;
                    if stop {
                        break;
                    }
                }
            }
        }
        (None, None) => {
            let (T::V(sv), T::V(ov)) = (a.s, a.o) else { unreachable!() };
            for t @ (s, _, o) in ix.label_edges(a.p) {
                if !ok(t) || (sv == ov && s != o) {
                    continue;
                }
                bind[sv] = Some(s);
                bind[ov] = Some(o);
                stop = search(ix, atoms, used, bind, avoid, visit);
                bind[sv] = None;
                bind[ov] = None;
                if stop {
                    break;
                }
            }
        }
    }
    used[i] = false;
    stop
}

/// Binds the head of `c` to `e`, or `None` if the head cannot match it.
fn bind_head(c: &Compiled, e: Triple) -> Option<Vec<Option<Id>>> {
    if c.head.p != e.1 {
        return None;
    }
    let mut bind = vec![None; c.nvars];
    for (t, v) in [(c.head.s, e.0), (c.head.o, e.2)] {
        match t {
            T::C(k) if k != v => return None,
            T::C(_) => {}
            T::V(x) if bind[x].is_some_and(|b| b != v) => return None,
            T::V(x) => bind[x] = Some(v),
        }
    }
    Some(bind)
}

fn supported_directly(ix: &Index, c: &Compiled, e: Triple) -> bool {
    let Some(mut bind) = bind_head(c, e) else { return false };
    let mut used = vec![false; c.body.len()];
    search(ix, &c.body, &mut used, &mut bind, Some(e), &mut |_| true)
}

/// Head instances of all body matches; `c` must be safe.
fn derive(ix: &Index, c: &Compiled) -> BTreeSet<Triple> {
    let mut out = BTreeSet::new();
    let mut bind = vec![None; c.nvars];
    let mut used = vec![false; c.body.len()];
    search(ix, &c.body, &mut used, &mut bind, None, &mut |b| {
        let s = value(c.head.s, b).expect("safe rule");
        let o = value(c.head.o, b).expect("safe rule");
        out.insert((s, c.head.p, o));
        false
    });
    out
}

/// Like [`derive`], but head variables the body leaves unbound range over
/// every node id below `nodes`.
fn derive_open(ix: &Index, c: &Compiled, nodes: Id) -> BTreeSet<Triple> {
    let mut out = BTreeSet::new();
    let mut bind = vec![None; c.nvars];
    let mut used = vec![false; c.body.len()];
    search(ix, &c.body, &mut used, &mut bind, None, &mut |b| {
        let range = |t: T| match value(t, b) {
            Some(v) => v..v + 1,
            None => 0..nodes,
        };
        // A head with the same unbound variable twice only yields loops.
        let same = matches!((c.head.s, c.head.o), (T::V(x), T::V(y)) if x == y);
        for s in range(c.head.s) {
            if same {
                out.insert((s, c.head.p, s));
                continue;
            }
            for o in range(c.head.o) {
                out.insert((s, c.head.p, o));
            }
        }
        false
    });
    out
}

fn fixpoint_with(edges: impl IntoIterator<Item = Triple>, step: impl Fn(&Index) -> BTreeSet<Triple>) -> HashSet<Triple> {
    let mut all: HashSet<Triple> = edges.into_iter().collect();
    loop {
        let ix = Index::new(all.iter().copied());
        let before = all.len();
        all.extend(step(&ix));
        if all.len() == before {
            return all;
        }
    }
}

fn fixpoint(edges: impl IntoIterator<Item = Triple>, c: &Compiled) -> HashSet<Triple> {
    fixpoint_with(edges, |ix| derive(ix, c))
}

/// Candidates `e` whose head binding satisfies the body in `M − e`, where
/// `M` closes the graph under the rule with unbound head variables ranging
/// over all nodes. Bounds the support of every refinement, including
/// recursive ones whose derivations run through edges missing from `E`.
fn optimistic_list(kb: &Kb, c: &Compiled, candidates: &[Triple]) -> Vec<Triple> {
    if !c.body.iter().any(|a| a.p == c.head.p) {
        return direct_list(kb, c, Some(candidates));
    }
    let nodes = kb.node_id.len() as Id;
    let model = fixpoint_with(kb.index.edges.iter().copied(), |ix| derive_open(ix, c, nodes));
    let ix = Index::new(model);
    candidates.iter().copied().filter(|e| supported_directly(&ix, c, *e)).collect()
}

/// Direct support restricted to `candidates` (all head-label edges when
/// `None`).
fn direct_list(kb: &Kb, c: &Compiled, candidates: Option<&[Triple]>) -> Vec<Triple> {
    let check = |e: &Triple| supported_directly(&kb.index, c, *e);
    match candidates {
        Some(list) => list.iter().copied().filter(check).collect(),
        None => kb.index.label_edges(c.head.p).filter(check).collect(),
    }
}

/// Scores a safe rule, or returns `None` as soon as its support is known
/// to fall below `floor`. Negatives are only counted when `confidence` is
/// set; otherwise they are reported as zero.
fn score_compiled(kb: &Kb, c: &Compiled, direct: &[Triple], floor: usize, confidence: bool) -> Option<ScoreReport> {
    let ix = &kb.index;
    let mut support = direct.len();
    let mut model = None;
    if c.recursive {
        // An edge derivable from G−e is in particular derivable in one step
        // from the least model of G without using itself.
        let full = fixpoint(ix.edges.iter().copied(), c);
        let full_ix = Index::new(full.iter().copied());
        let known: HashSet<&Triple> = direct.iter().collect();
        let maybe: Vec<Triple> = ix
            .label_edges(c.head.p)
            .filter(|e| !known.contains(e) && supported_directly(&full_ix, c, *e))
            .collect();
        if support + maybe.len() < floor {
            return None;
        }
        support += maybe
            .iter()
            .filter(|e| fixpoint(ix.edges.iter().copied().filter(|x| x != *e), c).contains(e))
            .count();
        model = Some(full);
    }
    if support < floor {
        return None;
    }
    let negative = if confidence {
        let derived: Vec<Triple> = match model {
            Some(m) => m.into_iter().collect(),
            None => derive(ix, c).into_iter().collect(),
        };
        derived.iter().filter(|&&(s, p, o)| !ix.edges.contains(&(s, p, o)) && ix.out.contains_key(&(p, s))).count()
    } else {
        0
    };
    let confidence = if support + negative == 0 { 0.0 } else { support as f64 / (support + negative) as f64 };
    Some(ScoreReport { support, negative, confidence })
}

/// Head-label edges `e` whose removal still leaves `e` derivable in one
/// rule application. For rules whose head variables are not all bound by
/// the body this is the usual generalisation used to prune the search.
pub fn direct_support(g: &Graph, h: &Hypothesis) -> usize {
    let kb = Kb::new(g);
    direct_list(&kb, &kb.compile(h), None).len()
}

/// Positive support `|{e ∈ E | G−e ⊭ e, G−e ∪ ψ ⊨ e}|`, negative support
/// over the PCA negatives and confidence `σ+/(σ+ + σ−)` (0 when both are 0).
///
/// Entailment is the least model under the single rule, so recursive rules
/// may gain support through chains of derived edges.
pub fn score_rule(g: &Graph, h: &Hypothesis) -> Result<ScoreReport, MineError> {
    if !h.is_safe() {
        return Err(MineError::Unsafe(h.unsafe_vars()));
    }
    let kb = Kb::new(g);
    let c = kb.compile(h);
    Ok(score_compiled(&kb, &c, &direct_list(&kb, &c, None), 0, true).expect("floor 0 always scores"))
}

/// Atoms available to refinements of a given graph.
struct Refiner {
    labels: Vec<String>,
    /// Per label: constants (degree ≥ 2) with an outgoing / incoming edge.
    sources: BTreeMap<String, Vec<String>>,
    targets: BTreeMap<String, Vec<String>>,
}

impl Refiner {
    fn new(g: &Graph) -> Refiner {
        let mut degree: BTreeMap<&str, usize> = BTreeMap::new();
        for e in g.edges() {
            *degree.entry(&e.s).or_default() += 1;
            *degree.entry(&e.o).or_default() += 1;
        }
        let constant = |n: &str| degree.get(n).is_some_and(|&d| d >= 2);
        let mut sources: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut targets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in g.edges() {
            if constant(&e.s) {
                sources.entry(e.p.clone()).or_default().insert(e.s.clone());
            }
            if constant(&e.o) {
                targets.entry(e.p.clone()).or_default().insert(e.o.clone());
            }
        }
        let flat = |m: BTreeMap<String, BTreeSet<String>>| m.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
        Refiner { labels: g.labels().iter().cloned().collect(), sources: flat(sources), targets: flat(targets) }
    }

    /// With `prune`, atoms after which the open variables could no longer
    /// all be closed within `max_len` are skipped.
    fn refine(&self, h: &Hypothesis, max_len: usize, prune: bool) -> Vec<Hypothesis> {
        if h.len() >= max_len {
            return Vec::new();
        }
        let vars: Vec<Term> = h.vars().iter().map(|v| Term::var(v)).collect();
        let fresh = Term::var(&format!("_new{}", vars.len()));
        let mut atoms = Vec::new();
        for l in &self.labels {
            for v in &vars {
                if !(prune && h.len() + 1 == max_len) {
                    atoms.push(atom(v.clone(), l, fresh.clone()));
                    atoms.push(atom(fresh.clone(), l, v.clone()));
                }
                for c in self.targets.get(l).into_iter().flatten() {
                    atoms.push(atom(v.clone(), l, Term::constant(c)));
                }
                for c in self.sources.get(l).into_iter().flatten() {
                    atoms.push(atom(Term::constant(c), l, v.clone()));
                }
                for w in vars.iter().filter(|w| *w != v) {
                    atoms.push(atom(v.clone(), l, w.clone()));
                }
            }
        }
        let uses = h.var_uses();
        let budget = 2 * (max_len - h.len() - 1);
        let open_after = |a: &TriplePattern| -> usize {
            let touched: BTreeSet<&str> = [&a.s, &a.o].into_iter().filter_map(Term::as_var).collect();
            let still_open = uses.iter().filter(|(v, &n)| n == 1 && !touched.contains(v.as_str())).count();
            still_open + touched.iter().filter(|v| !uses.contains_key(**v)).count()
        };
        let mut out = BTreeSet::new();
        for a in atoms {
            if a == h.head || h.body.contains(&a) || (prune && open_after(&a) > budget) {
                continue;
            }
            let mut body = h.body.clone();
            body.push(a);
            out.insert(Hypothesis { head: h.head.clone(), body }.canonical());
        }
        out.into_iter().collect()
    }
}

/// All one-atom extensions of `h`, in canonical form and without
/// duplicates:
///
/// 1. an existing variable and a fresh one;
/// 2. an existing variable and a constant node of degree at least 2 that
///    has an edge with that label in that direction;
/// 3. two distinct existing variables.
///
/// Returns nothing once `h` has `max_len` body atoms.
pub fn refine(g: &Graph, h: &Hypothesis, max_len: usize) -> Vec<Hypothesis> {
    Refiner::new(g).refine(h, max_len, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MineConfig {
    pub min_support: usize,
    pub min_confidence: f64,
    pub max_length: usize,
    pub head_labels: Option<BTreeSet<String>>,
}

impl MineConfig {
    pub fn new(min_support: usize, min_confidence: f64, max_length: usize) -> Self {
        MineConfig { min_support, min_confidence, max_length, head_labels: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mined {
    pub hypothesis: Hypothesis,
    pub report: ScoreReport,
}

/// Sort key of mined rules: confidence, then support, both descending,
/// then the rule text.
pub fn sort_mined(rules: &mut [Mined]) {
    rules.sort_by_cached_key(|m| (std::cmp::Reverse(OrdF64(m.report.confidence)), std::cmp::Reverse(m.report.support), m.hypothesis.to_string()));
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Breadth-first refinement from one head per label.
///
/// A rule survives a level if its support reaches `max(min_support, 1)`;
/// rules that are not yet safe are measured by an upper bound on the
/// support of their refinements. A rule
/// whose variables seen only once cannot all be closed by the remaining
/// atoms is dropped as well. Closed safe rules meeting both thresholds are
/// reported.
pub fn mine(g: &Graph, cfg: &MineConfig) -> Result<Vec<Mined>, MineError> {
    if cfg.max_length == 0 {
        return Err(MineError::Config("max length must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.min_confidence) {
        return Err(MineError::Config(format!("minimum confidence {} is not in [0,1]", cfg.min_confidence)));
    }
    let floor = cfg.min_support.max(1);
    let kb = Kb::new(g);
    let refiner = Refiner::new(g);
    let mut frontier: Vec<(Hypothesis, Vec<Triple>)> = g
        .labels()
        .iter()
        .filter(|l| cfg.head_labels.as_ref().is_none_or(|a| a.contains(*l)))
        .map(|l| {
            let h = Hypothesis::head_only(l);
            let all = kb.index.label_edges(kb.label_id[l]).collect();
            (h, all)
        })
        .collect();
    let mut found = Vec::new();
    for _ in 0..cfg.max_length {
        let mut parent_of: BTreeMap<Hypothesis, usize> = BTreeMap::new();
        let children: Vec<Vec<Hypothesis>> =
            frontier.par_iter().map(|(h, _)| refiner.refine(h, cfg.max_length, true)).collect();
        for (i, kids) in children.into_iter().enumerate() {
            for k in kids {
                parent_of.entry(k).or_insert(i);
            }
        }
        let scored: Vec<(Hypothesis, Vec<Triple>, Option<ScoreReport>)> = parent_of
            .into_par_iter()
            .filter_map(|(h, i)| {
                let c = kb.compile(&h);
                if !h.is_safe() {
                    let bound = optimistic_list(&kb, &c, &frontier[i].1);
                    return (bound.len() >= floor).then_some((h, bound, None));
                }
                let direct = direct_list(&kb, &c, Some(&frontier[i].1));
                let closed = h.is_closed();
                let report = score_compiled(&kb, &c, &direct, floor, closed)?;
                Some((h, direct, closed.then_some(report)))
            })
            .collect();
        frontier = Vec::with_capacity(scored.len());
        for (h, direct, report) in scored {
            if let Some(r) = report {
                if r.support >= cfg.min_support && r.confidence >= cfg.min_confidence {
                    found.push(Mined { hypothesis: h.clone(), report: r });
                }
            }
            frontier.push((h, direct));
        }
        if frontier.is_empty() {
            break;
        }
    }
    sort_mined(&mut found);
    Ok(found)
}

pub fn mined_to_tsv(rules: &[Mined]) -> String {
    let mut out = String::from("rule\tsupport\tconfidence\n");
    for m in rules {
        out.push_str(&format!("{}\t{}\t{}\n", m.hypothesis, m.report.support, m.report.confidence));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    #[test]
    fn canonical_renames_and_sorts() {
        let a = Hypothesis::new(
            atom(v("x"), "p", v("y")),
            vec![atom(v("x"), "q", v("k")), atom(v("k"), "r", v("y"))],
        );
        let b = Hypothesis::new(
            atom(v("x"), "p", v("y")),
            vec![atom(v("m"), "r", v("y")), atom(v("x"), "q", v("m"))],
        );
        assert_eq!(a.canonical(), b.canonical());
        assert!(a.canonical().vars().contains(&"z".to_string()));
    }

    #[test]
    fn closedness_and_safety() {
        let head = atom(v("x"), "p", v("y"));
        let open = Hypothesis::new(head.clone(), vec![atom(v("z"), "q", v("x"))]);
        assert!(!open.is_closed());
        assert!(!open.is_safe());
        let closed = Hypothesis::new(head.clone(), vec![atom(v("y"), "p", v("x"))]);
        assert!(closed.is_closed() && closed.is_safe() && closed.is_recursive());
        let with_const = Hypothesis::new(head, vec![atom(v("x"), "q", Term::constant("c")), atom(v("y"), "q", v("x"))]);
        assert!(with_const.is_closed());
        assert!(score_rule(&Graph::empty(), &open).is_err());
    }

    #[test]
    fn recursive_support_uses_entailment() {
        // Transitivity derives a→d from the chain a→b→c→d once a→d is removed.
        let g = Graph::from_triples([("a", "p", "b"), ("b", "p", "c"), ("c", "p", "d"), ("a", "p", "d")]);
        let h = Hypothesis::new(atom(v("x"), "p", v("y")), vec![atom(v("x"), "p", v("z")), atom(v("z"), "p", v("y"))]);
        assert_eq!(direct_support(&g, &h), 0);
        let r = score_rule(&g, &h).unwrap();
        assert_eq!(r.support, 1);
        // Derived a→c, b→d, a→d: a→c and b→d are PCA negatives.
        assert_eq!(r.negative, 2);
    }

    #[test]
    fn recursive_rules_behind_unsupported_parents_are_found() {
        // x p y ⇐ d p x ∧ y p c has no one-step support, and neither has its
        // parent d p x, yet removing c→d leaves it derivable through d→c.
        let g = Graph::from_triples([("c", "p", "c"), ("c", "p", "d"), ("d", "p", "d")]);
        let h = Hypothesis::new(
            atom(v("x"), "p", v("y")),
            vec![atom(Term::constant("d"), "p", v("x")), atom(v("y"), "p", Term::constant("c"))],
        )
        .canonical();
        assert_eq!(direct_support(&g, &h), 0);
        assert_eq!(score_rule(&g, &h).unwrap().support, 1);
        assert!(mine(&g, &MineConfig::new(1, 0.0, 2)).unwrap().iter().any(|m| m.hypothesis == h));
    }

    #[test]
    fn refine_stops_at_max_length() {
        let g = Graph::from_triples([("a", "p", "b")]);
        let h = Hypothesis::head_only("p");
        assert!(refine(&g, &h, 0).is_empty());
        let one = refine(&g, &h, 1);
        assert!(one.iter().all(|r| r.len() == 1));
        assert!(one.iter().all(|r| refine(&g, r, 1).is_empty()));
    }

    #[test]
    fn mine_degenerate_inputs() {
        assert!(mine(&Graph::empty(), &MineConfig::new(1, 0.5, 2)).unwrap().is_empty());
        let g = Graph::from_triples([("a", "p", "b"), ("b", "p", "a")]);
        assert!(mine(&g, &MineConfig::new(3, 0.0, 2)).unwrap().is_empty());
        assert!(mine(&g, &MineConfig::new(1, 0.0, 0)).is_err());
        let sym = mine(&g, &MineConfig::new(1, 0.5, 1)).unwrap();
        assert_eq!(sym.len(), 1);
        assert_eq!(sym[0].report, ScoreReport { support: 2, negative: 0, confidence: 1.0 });
    }
}
