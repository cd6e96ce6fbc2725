//! Directed edge-labelled graphs, property graphs and graph datasets.
//!
//! Graphs are immutable once built. Every graph keeps three hash indexes
//! (by subject, by label, by object) over a sorted, duplicate-free edge list.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown graph format `{0}`")]
    UnknownFormat(String),
}

fn parse_err(line: usize, reason: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        reason: reason.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub s: String,
    pub p: String,
    pub o: String,
}

impl Edge {
    pub fn new(s: impl Into<String>, p: impl Into<String>, o: impl Into<String>) -> Self {
        Edge {
            s: s.into(),
            p: p.into(),
            o: o.into(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.s, self.p, self.o)
    }
}

/// A directed edge-labelled graph `(V, E, L)`.
#[derive(Clone, Default)]
pub struct Graph {
    nodes: BTreeSet<String>,
    labels: BTreeSet<String>,
    edges: Vec<Edge>,
    by_s: HashMap<String, Vec<usize>>,
    by_p: HashMap<String, Vec<usize>>,
    by_o: HashMap<String, Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.labels == other.labels && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("nodes", &self.nodes)
            .field("labels", &self.labels)
            .field("edges", &self.edges)
            .finish()
    }
}

impl Graph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a graph from explicit node and label sets plus edges; endpoints
    /// and edge labels are added to `V` and `L` when missing.
    pub fn new<N, L, E>(nodes: N, labels: L, edges: E) -> Self
    where
        N: IntoIterator,
        N::Item: Into<String>,
        L: IntoIterator,
        L::Item: Into<String>,
        E: IntoIterator<Item = Edge>,
    {
        let mut nodes: BTreeSet<String> = nodes.into_iter().map(Into::into).collect();
        let mut labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        for e in &edges {
            debug_assert!(!e.s.is_empty() && !e.p.is_empty() && !e.o.is_empty());
            nodes.insert(e.s.clone());
            nodes.insert(e.o.clone());
            labels.insert(e.p.clone());
        }
        let edges: Vec<Edge> = edges.into_iter().collect();
        let mut g = Graph {
            nodes,
            labels,
            edges,
            ..Default::default()
        };
        for (i, e) in g.edges.iter().enumerate() {
            g.by_s.entry(e.s.clone()).or_default().push(i);
            g.by_p.entry(e.p.clone()).or_default().push(i);
            g.by_o.entry(e.o.clone()).or_default().push(i);
        }
        g
    }

    pub fn from_edges<E: IntoIterator<Item = Edge>>(edges: E) -> Self {
        Self::new(Vec::<String>::new(), Vec::<String>::new(), edges)
    }

    /// Convenience constructor from `(s, p, o)` string triples.
    pub fn from_triples<'a, I: IntoIterator<Item = (&'a str, &'a str, &'a str)>>(triples: I) -> Self {
        Self::from_edges(triples.into_iter().map(|(s, p, o)| Edge::new(s, p, o)))
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    /// Edges in ascending `(s, p, o)` order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.nodes.is_empty() && self.labels.is_empty()
    }

    pub fn contains(&self, s: &str, p: &str, o: &str) -> bool {
        self.by_s
            .get(s)
            .is_some_and(|ix| ix.iter().any(|&i| self.edges[i].p == p && self.edges[i].o == o))
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    pub fn out_edges<'a>(&'a self, s: &str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.indexed(self.by_s.get(s))
    }

    pub fn in_edges<'a>(&'a self, o: &str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.indexed(self.by_o.get(o))
    }

    pub fn edges_with_label<'a>(&'a self, p: &str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.indexed(self.by_p.get(p))
    }

    fn indexed<'a>(&'a self, ix: Option<&'a Vec<usize>>) -> impl Iterator<Item = &'a Edge> + 'a {
        ix.into_iter().flatten().map(move |&i| &self.edges[i])
    }

    /// Upper bound on the edges matching the given bound positions, read
    /// off the smallest applicable index.
    pub fn candidate_count(&self, s: Option<&str>, p: Option<&str>, o: Option<&str>) -> usize {
        let mut best = self.edges.len();
        if let Some(s) = s {
            best = best.min(self.by_s.get(s).map_or(0, Vec::len));
        }
        if let Some(p) = p {
            best = best.min(self.by_p.get(p).map_or(0, Vec::len));
        }
        if let Some(o) = o {
            best = best.min(self.by_o.get(o).map_or(0, Vec::len));
        }
        best
    }

    /// All edges agreeing with the bound positions.
    pub fn matching(&self, s: Option<&str>, p: Option<&str>, o: Option<&str>) -> Vec<&Edge> {
        let cands: Vec<&Vec<usize>> = [(s, &self.by_s), (p, &self.by_p), (o, &self.by_o)]
            .into_iter()
            .filter_map(|(k, ix)| k.map(|k| ix.get(k)))
            .map(|found| found.map_or(&EMPTY, |v| v))
            .collect();
        let keep = |e: &Edge| {
            s.is_none_or(|s| e.s == s) && p.is_none_or(|p| e.p == p) && o.is_none_or(|o| e.o == o)
        };
        match cands.iter().min_by_key(|v| v.len()) {
            Some(best) => best.iter().map(|&i| &self.edges[i]).filter(|e| keep(e)).collect(),
            None => self.edges.iter().collect(),
        }
    }

    /// Graph induced by `E1 ∪ E2`, keeping isolated nodes and labels of both.
    pub fn union(&self, other: &Graph) -> Graph {
        Graph::new(
            self.nodes.iter().chain(&other.nodes).cloned(),
            self.labels.iter().chain(&other.labels).cloned(),
            self.edges.iter().chain(&other.edges).cloned(),
        )
    }

    /// `V1 ⊆ V2`, `E1 ⊆ E2` and `L1 ⊆ L2`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.nodes.is_subset(&other.nodes)
            && self.labels.is_subset(&other.labels)
            && self.edges.iter().all(|e| other.contains_edge(e))
    }

    /// Nodes that occur in no edge.
    pub fn isolated_nodes(&self) -> impl Iterator<Item = &String> {
        self.nodes
            .iter()
            .filter(|n| !self.by_s.contains_key(*n) && !self.by_o.contains_key(*n))
    }

    /// Writes the graph in `tsv-triples` form: sorted edges then `node` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!("{e}\n"));
        }
        for n in self.isolated_nodes() {
            out.push_str(&format!("node\t{n}\n"));
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Graph, GraphError> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (line, cols) in tsv_rows(text)? {
            match cols.as_slice() {
                ["node", x] => nodes.push(x.to_string()),
                [s, p, o] => edges.push(Edge::new(*s, *p, *o)),
                _ => {
                    return Err(parse_err(
                        line,
                        format!("expected 3 columns (s, p, o) or `node<TAB>x`, found {}", cols.len()),
                    ))
                }
            }
        }
        Ok(Graph::new(nodes, Vec::<String>::new(), edges))
    }
}

static EMPTY: Vec<usize> = Vec::new();

/// Splits a TSV document into numbered rows, skipping blank and `#` lines.
/// Fields must be non-empty except where `allow_empty_first` permits.
fn tsv_rows(text: &str) -> Result<Vec<(usize, Vec<&str>)>, GraphError> {
    tsv_rows_with(text, false)
}

fn tsv_rows_with(text: &str, allow_empty_first: bool) -> Result<Vec<(usize, Vec<&str>)>, GraphError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        for (k, c) in cols.iter().enumerate() {
            if c.is_empty() && !(allow_empty_first && k == 0) {
                return Err(parse_err(line, format!("empty field in column {}", k + 1)));
            }
        }
        rows.push((line, cols));
    }
    Ok(rows)
}

/// A default graph plus uniquely named graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphDataset {
    pub default_graph: Graph,
    pub named: BTreeMap<String, Graph>,
}

impl GraphDataset {
    /// `name<TAB>s<TAB>p<TAB>o` rows (empty name = default graph) and
    /// `name<TAB>node<TAB>x` isolated-node rows.
    pub fn parse_tsv(text: &str) -> Result<GraphDataset, GraphError> {
        let mut parts: BTreeMap<String, (Vec<String>, Vec<Edge>)> = BTreeMap::new();
        for (line, cols) in tsv_rows_with(text, true)? {
            match cols.as_slice() {
                [name, "node", x] => parts.entry(name.to_string()).or_default().0.push(x.to_string()),
                [name, s, p, o] => parts
                    .entry(name.to_string())
                    .or_default()
                    .1
                    .push(Edge::new(*s, *p, *o)),
                _ => {
                    return Err(parse_err(
                        line,
                        format!("expected 4 columns (graph, s, p, o), found {}", cols.len()),
                    ))
                }
            }
        }
        let mut ds = GraphDataset::default();
        for (name, (nodes, edges)) in parts {
            let g = Graph::new(nodes, Vec::<String>::new(), edges);
            if name.is_empty() {
                ds.default_graph = g;
            } else {
                ds.named.insert(name, g);
            }
        }
        Ok(ds)
    }

    /// Union of the default graph and every named graph.
    pub fn merged(&self) -> Graph {
        self.named.values().fold(self.default_graph.clone(), |acc, g| acc.union(g))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let graphs = std::iter::once(("", &self.default_graph))
            .chain(self.named.iter().map(|(n, g)| (n.as_str(), g)));
        for (name, g) in graphs {
            for e in g.edges() {
                out.push_str(&format!("{name}\t{e}\n"));
            }
            for n in g.isolated_nodes() {
                out.push_str(&format!("{name}\tnode\t{n}\n"));
            }
        }
        out
    }
}

/// A property graph `(V, E, L, P, U, e, l, p)`. `L`, `P` and `U` are read off
/// `label_of` and `props_of`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyGraph {
    pub node_ids: BTreeSet<String>,
    pub edge_ids: BTreeSet<String>,
    pub endpoints: BTreeMap<String, (String, String)>,
    pub label_of: BTreeMap<String, BTreeSet<String>>,
    pub props_of: BTreeMap<String, BTreeSet<(String, String)>>,
}

const FROM: &str = "from";
const TO: &str = "to";
const MODE: &str = "mode";
const TYPE: &str = "type";

fn escape_prop(k: &str) -> String {
    if [FROM, TO, MODE, TYPE].contains(&k) || k.starts_with('\\') {
        format!("\\{k}")
    } else {
        k.to_string()
    }
}

fn unescape_prop(k: &str) -> &str {
    k.strip_prefix('\\').unwrap_or(k)
}

impl PropertyGraph {
    pub fn add_node(&mut self, id: &str) {
        self.node_ids.insert(id.to_string());
        self.label_of.entry(id.to_string()).or_default();
        self.props_of.entry(id.to_string()).or_default();
    }

    pub fn add_edge(&mut self, id: &str, src: &str, dst: &str) {
        self.add_node(src);
        self.add_node(dst);
        self.edge_ids.insert(id.to_string());
        self.endpoints.insert(id.to_string(), (src.to_string(), dst.to_string()));
        self.label_of.entry(id.to_string()).or_default();
        self.props_of.entry(id.to_string()).or_default();
    }

    pub fn add_label(&mut self, id: &str, label: &str) {
        self.label_of.entry(id.to_string()).or_default().insert(label.to_string());
    }

    pub fn add_prop(&mut self, id: &str, prop: &str, value: &str) {
        self.props_of
            .entry(id.to_string())
            .or_default()
            .insert((prop.to_string(), value.to_string()));
    }

    pub fn labels(&self) -> BTreeSet<&String> {
        self.label_of.values().flatten().collect()
    }

    pub fn props(&self) -> BTreeSet<&String> {
        self.props_of.values().flatten().map(|(p, _)| p).collect()
    }

    pub fn values(&self) -> BTreeSet<&String> {
        self.props_of.values().flatten().map(|(_, v)| v).collect()
    }

    /// Rows `N id [label]`, `NP id prop value`, `E id src dst [label]`,
    /// `EP id prop value`.
    pub fn parse_tsv(text: &str) -> Result<PropertyGraph, GraphError> {
        let mut pg = PropertyGraph::default();
        for (line, cols) in tsv_rows(text)? {
            match cols.as_slice() {
                ["N", id] => pg.add_node(id),
                ["N", id, label] => {
                    pg.add_node(id);
                    pg.add_label(id, label);
                }
                ["NP", id, prop, value] => {
                    pg.add_node(id);
                    pg.add_prop(id, prop, value);
                }
                ["E", id, src, dst] | ["E", id, src, dst, _] => {
                    if let Some((s0, d0)) = pg.endpoints.get(*id) {
                        if (s0.as_str(), d0.as_str()) != (*src, *dst) {
                            return Err(parse_err(line, format!("edge `{id}` redeclared with other endpoints")));
                        }
                    }
                    pg.add_edge(id, src, dst);
                    if let [_, _, _, _, label] = cols.as_slice() {
                        pg.add_label(id, label);
                    }
                }
                ["EP", id, prop, value] => {
                    if !pg.edge_ids.contains(*id) {
                        return Err(parse_err(line, format!("property on undeclared edge `{id}`")));
                    }
                    pg.add_prop(id, prop, value);
                }
                [kind, ..] => {
                    return Err(parse_err(
                        line,
                        format!("unknown row kind `{kind}` or wrong column count ({})", cols.len()),
                    ))
                }
                [] => unreachable!("split yields at least one field"),
            }
        }
        Ok(pg)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for n in &self.node_ids {
            let labels = &self.label_of[n];
            if labels.is_empty() {
                out.push_str(&format!("N\t{n}\n"));
            }
            for l in labels {
                out.push_str(&format!("N\t{n}\t{l}\n"));
            }
            for (k, v) in &self.props_of[n] {
                out.push_str(&format!("NP\t{n}\t{k}\t{v}\n"));
            }
        }
        for e in &self.edge_ids {
            let (s, d) = &self.endpoints[e];
            let labels = &self.label_of[e];
            if labels.is_empty() {
                out.push_str(&format!("E\t{e}\t{s}\t{d}\n"));
            }
            for l in labels {
                out.push_str(&format!("E\t{e}\t{s}\t{d}\t{l}\n"));
            }
            for (k, v) in &self.props_of[e] {
                out.push_str(&format!("EP\t{e}\t{k}\t{v}\n"));
            }
        }
        out
    }

    /// Reifies the property graph as an edge-labelled graph: every edge id
    /// becomes a node with `from`, `to` and `mode` edges, node labels become
    /// `type` edges and properties become plain edges.
    pub fn to_del(&self) -> Graph {
        let mut edges = Vec::new();
        let mut isolated = Vec::new();
        for n in &self.node_ids {
            for l in &self.label_of[n] {
                edges.push(Edge::new(n, TYPE, l));
            }
            for (k, v) in &self.props_of[n] {
                edges.push(Edge::new(n, escape_prop(k), v));
            }
            if self.label_of[n].is_empty() && self.props_of[n].is_empty() {
                isolated.push(n.clone());
            }
        }
        for e in &self.edge_ids {
            let (s, d) = &self.endpoints[e];
            edges.push(Edge::new(e, FROM, s));
            edges.push(Edge::new(e, TO, d));
            for l in &self.label_of[e] {
                edges.push(Edge::new(e, MODE, l));
            }
            for (k, v) in &self.props_of[e] {
                edges.push(Edge::new(e, escape_prop(k), v));
            }
        }
        Graph::new(isolated, Vec::<String>::new(), edges)
    }

    /// Inverse of [`PropertyGraph::to_del`] on its outputs.
    pub fn from_del(g: &Graph) -> PropertyGraph {
        let mut pg = PropertyGraph::default();
        let edge_ids: BTreeSet<&String> = g.edges_with_label(FROM).map(|e| &e.s).collect();
        for id in &edge_ids {
            let src = g.out_edges(id).find(|e| e.p == FROM).map(|e| e.o.clone());
            let dst = g.out_edges(id).find(|e| e.p == TO).map(|e| e.o.clone());
            if let (Some(s), Some(d)) = (src, dst) {
                pg.add_edge(id, &s, &d);
            }
        }
        for n in g.isolated_nodes() {
            pg.add_node(n);
        }
        for e in g.edges() {
            if edge_ids.contains(&e.s) {
                match e.p.as_str() {
                    FROM | TO => {}
                    MODE => pg.add_label(&e.s, &e.o),
                    k => pg.add_prop(&e.s, unescape_prop(k), &e.o),
                }
            } else {
                pg.add_node(&e.s);
                match e.p.as_str() {
                    TYPE => pg.add_label(&e.s, &e.o),
                    k => pg.add_prop(&e.s, unescape_prop(k), &e.o),
                }
            }
        }
        pg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Triples,
    Dataset,
    PropertyGraph,
}

impl std::str::FromStr for Format {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv-triples" => Ok(Format::Triples),
            "tsv-dataset" => Ok(Format::Dataset),
            "tsv-pg" => Ok(Format::PropertyGraph),
            other => Err(GraphError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parsed {
    Graph(Graph),
    Dataset(GraphDataset),
    PropertyGraph(PropertyGraph),
}

pub fn parse_graph(text: &str, format: Format) -> Result<Parsed, GraphError> {
    Ok(match format {
        Format::Triples => Parsed::Graph(Graph::parse_tsv(text)?),
        Format::Dataset => Parsed::Dataset(GraphDataset::parse_tsv(text)?),
        Format::PropertyGraph => Parsed::PropertyGraph(PropertyGraph::parse_tsv(text)?),
    })
}
