//! Directed vector-labelled graphs, the graph-parallel framework
//! (message / aggregate / end) and its PageRank and degree instances.

use std::collections::{BTreeMap, BTreeSet};

use kg_core::Graph;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Nodes and edges each carry a feature vector; node vectors share one
/// dimension and edge vectors another.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGraph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
    node_vecs: Vec<Vec<f64>>,
    edge_vecs: Vec<Vec<f64>>,
    /// Incoming edge ids per node.
    incoming: Vec<Vec<usize>>,
}

impl VectorGraph {
    pub fn new(
        nodes: Vec<String>,
        node_vecs: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        edge_vecs: Vec<Vec<f64>>,
    ) -> Result<VectorGraph, AnalyticsError> {
        if nodes.len() != node_vecs.len() || edges.len() != edge_vecs.len() {
            return Err(AnalyticsError::Dimension("every node and edge needs exactly one vector".into()));
        }
        if let Some(&(s, o)) = edges.iter().find(|(s, o)| *s >= nodes.len() || *o >= nodes.len()) {
            return Err(AnalyticsError::Dimension(format!("edge ({s},{o}) refers to a missing node")));
        }
        for (what, vecs) in [("node", &node_vecs), ("edge", &edge_vecs)] {
            if let Some(first) = vecs.first() {
                if vecs.iter().any(|v| v.len() != first.len()) {
                    return Err(AnalyticsError::Dimension(format!("{what} vectors differ in length")));
                }
            }
        }
        let mut incoming = vec![Vec::new(); nodes.len()];
        for (i, &(_, o)) in edges.iter().enumerate() {
            incoming[o].push(i);
        }
        Ok(VectorGraph { nodes, edges, node_vecs, edge_vecs, incoming })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_vecs(&self) -> &[Vec<f64>] {
        &self.node_vecs
    }

    pub fn node_dim(&self) -> usize {
        self.node_vecs.first().map_or(0, Vec::len)
    }
}

/// The three callbacks of a graph-parallel computation.
///
/// `agg` receives the messages as a multiset; the framework hands them
/// over in a canonical order so floating-point results do not depend on
/// adjacency order.
pub trait Gpf: Sync {
    fn msg(&self, node: &[f64], edge: &[f64]) -> Vec<f64>;
    fn agg(&self, node: &[f64], messages: &[Vec<f64>]) -> Vec<f64>;
    /// Called with the iteration index, the previous vectors and the
    /// current ones. At iteration 0 both are the initial vectors.
    fn end(&self, iteration: usize, previous: &[Vec<f64>], current: &[Vec<f64>]) -> bool;
}

/// Runs supersteps until `end` holds or `max_iters` supersteps are done.
pub fn run_gpf<S: Gpf>(vg: &VectorGraph, spec: &S, max_iters: usize) -> Result<Vec<Vec<f64>>, AnalyticsError> {
    if max_iters == 0 {
        return Err(AnalyticsError::Config("max_iters must be at least 1".into()));
    }
    let dim = vg.node_dim();
    let mut current = vg.node_vecs.clone();
    if spec.end(0, &current, &current) {
        return Ok(current);
    }
    for i in 1..=max_iters {
        let next: Vec<Vec<f64>> = (0..vg.nodes.len())
            .into_par_iter()
            .map(|u| {
                let mut messages: Vec<Vec<f64>> = vg.incoming[u]
                    .iter()
                    .map(|&e| spec.msg(&current[vg.edges[e].0], &vg.edge_vecs[e]))
                    .collect();
                messages.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len())));
                spec.agg(&current[u], &messages)
            })
            .collect();
        if let Some(v) = next.iter().find(|v| v.len() != dim) {
            return Err(AnalyticsError::Dimension(format!("aggregate produced length {} for node dimension {dim}", v.len())));
        }
        let stop = spec.end(i, &current, &next);
        current = next;
        if stop {
            break;
        }
    }
    Ok(current)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub iters: usize,
    /// Stop early once the L1 change between iterations drops below this.
    pub epsilon: Option<f64>,
    /// Only edges with these labels are kept before labels are dropped.
    pub labels: Option<BTreeSet<String>>,
}

impl PageRankConfig {
    pub fn new(damping: f64, iters: usize) -> Self {
        PageRankConfig { damping, iters, epsilon: None, labels: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    /// Scores sorted by descending score, then node name.
    pub scores: Vec<(String, f64)>,
    /// L1 change of each executed iteration.
    pub residuals: Vec<f64>,
}

impl PageRank {
    pub fn get(&self, node: &str) -> Option<f64> {
        self.scores.iter().find(|(n, _)| n == node).map(|(_, s)| *s)
    }

    pub fn to_tsv(&self) -> String {
        self.scores.iter().map(|(n, s)| format!("{n}\t{s}\n")).collect()
    }
}

/// Edges `(x, z)` such that some labelled edge `x → z` exists, restricted
/// to the allowed labels when given.
pub fn project(g: &Graph, labels: Option<&BTreeSet<String>>) -> (Vec<String>, BTreeSet<(usize, usize)>) {
    let nodes: Vec<String> = g.nodes().iter().cloned().collect();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let edges = g
        .edges()
        .iter()
        .filter(|e| labels.is_none_or(|l| l.contains(&e.p)))
        .map(|e| (index[e.s.as_str()], index[e.o.as_str()]))
        .collect();
    (nodes, edges)
}

struct PageRankSpec {
    d: f64,
    n: f64,
    iters: usize,
    epsilon: Option<f64>,
}

impl Gpf for PageRankSpec {
    fn msg(&self, node: &[f64], edge: &[f64]) -> Vec<f64> {
        vec![self.d * node[0] * edge[0]]
    }

    fn agg(&self, _node: &[f64], messages: &[Vec<f64>]) -> Vec<f64> {
        vec![(1.0 - self.d) / self.n + messages.iter().map(|m| m[0]).sum::<f64>()]
    }

    fn end(&self, iteration: usize, previous: &[Vec<f64>], current: &[Vec<f64>]) -> bool {
        iteration >= self.iters || (iteration > 0 && self.epsilon.is_some_and(|eps| l1(previous, current) < eps))
    }
}

fn l1(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x[0] - y[0]).abs()).sum()
}

fn check_pagerank(d: f64, iters: usize) -> Result<(), AnalyticsError> {
    if !(d > 0.0 && d < 1.0) {
        return Err(AnalyticsError::Config(format!("damping factor {d} is not in (0,1)")));
    }
    if iters == 0 {
        return Err(AnalyticsError::Config("iters must be at least 1".into()));
    }
    Ok(())
}

/// The projected graph with `1/outdeg(source)` on each edge and initial
/// scores `1/|V|`. Nodes without out-edges are linked to every node with
/// weight `1/|V|`, which spreads their mass uniformly and keeps the scores
/// summing to one.
fn pagerank_input(g: &Graph, labels: Option<&BTreeSet<String>>) -> Option<VectorGraph> {
    let (nodes, projected) = project(g, labels);
    let n = nodes.len();
    if n == 0 {
        return None;
    }
    let mut outdeg = vec![0usize; n];
    for &(s, _) in &projected {
        outdeg[s] += 1;
    }
    let mut edges: Vec<(usize, usize)> = projected.iter().copied().collect();
    let mut weights: Vec<Vec<f64>> = edges.iter().map(|&(s, _)| vec![1.0 / outdeg[s] as f64]).collect();
    for v in (0..n).filter(|&v| outdeg[v] == 0) {
        for u in 0..n {
            edges.push((v, u));
            weights.push(vec![1.0 / n as f64]);
        }
    }
    Some(VectorGraph::new(nodes, vec![vec![1.0 / n as f64]; n], edges, weights).expect("projection yields valid indices"))
}

/// PageRank over the label-free projection, one superstep at a time so
/// that the residual of every iteration is reported.
pub fn pagerank_with(g: &Graph, cfg: &PageRankConfig) -> Result<PageRank, AnalyticsError> {
    check_pagerank(cfg.damping, cfg.iters)?;
    let Some(mut current) = pagerank_input(g, cfg.labels.as_ref()) else {
        return Ok(PageRank { scores: Vec::new(), residuals: Vec::new() });
    };
    let step = PageRankSpec { d: cfg.damping, n: current.nodes.len() as f64, iters: 1, epsilon: None };
    let mut residuals = Vec::new();
    for _ in 0..cfg.iters {
        let next = run_gpf(&current, &step, 1)?;
        let r = l1(&current.node_vecs, &next);
        residuals.push(r);
        current.node_vecs = next;
        if cfg.epsilon.is_some_and(|eps| r < eps) {
            break;
        }
    }
    let mut scores: Vec<(String, f64)> =
        current.nodes.iter().cloned().zip(current.node_vecs.iter().map(|v| v[0])).collect();
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(PageRank { scores, residuals })
}

/// Same computation as a single [`run_gpf`] call whose end condition
/// carries the iteration bound and residual threshold.
pub fn pagerank_gpf(g: &Graph, d: f64, iters: usize, epsilon: Option<f64>) -> Result<BTreeMap<String, f64>, AnalyticsError> {
    check_pagerank(d, iters)?;
    let Some(vg) = pagerank_input(g, None) else {
        return Ok(BTreeMap::new());
    };
    let spec = PageRankSpec { d, n: vg.nodes.len() as f64, iters, epsilon };
    let out = run_gpf(&vg, &spec, iters)?;
    Ok(vg.nodes.iter().cloned().zip(out.into_iter().map(|v| v[0])).collect())
}

pub fn pagerank(g: &Graph, d: f64, iters: usize) -> Result<PageRank, AnalyticsError> {
    pagerank_with(g, &PageRankConfig::new(d, iters))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

struct Count;

impl Gpf for Count {
    fn msg(&self, _node: &[f64], _edge: &[f64]) -> Vec<f64> {
        vec![1.0]
    }

    fn agg(&self, _node: &[f64], messages: &[Vec<f64>]) -> Vec<f64> {
        vec![messages.len() as f64]
    }

    fn end(&self, iteration: usize, _: &[Vec<f64>], _: &[Vec<f64>]) -> bool {
        iteration >= 1
    }
}

/// Degree of every node in the label-free projection, as one superstep.
pub fn degrees(g: &Graph, direction: Direction) -> BTreeMap<String, usize> {
    let (nodes, projected) = project(g, None);
    let edges: Vec<(usize, usize)> = match direction {
        Direction::In => projected.into_iter().collect(),
        Direction::Out => projected.into_iter().map(|(s, o)| (o, s)).collect(),
    };
    let n = nodes.len();
    if n == 0 {
        return BTreeMap::new();
    }
    let vg = VectorGraph::new(nodes, vec![vec![0.0]; n], edges.clone(), vec![Vec::new(); edges.len()])
        .expect("projection yields valid indices");
    let out = run_gpf(&vg, &Count, 1).expect("count keeps dimension 1");
    vg.nodes.iter().cloned().zip(out.into_iter().map(|v| v[0] as usize)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct SumOnes;

    impl Gpf for SumOnes {
        fn msg(&self, _: &[f64], _: &[f64]) -> Vec<f64> {
            vec![1.0]
        }
        fn agg(&self, _: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
            vec![m.iter().map(|v| v[0]).sum()]
        }
        fn end(&self, i: usize, _: &[Vec<f64>], _: &[Vec<f64>]) -> bool {
            i >= 1
        }
    }

    struct StopAtOnce;

    impl Gpf for StopAtOnce {
        fn msg(&self, n: &[f64], _: &[f64]) -> Vec<f64> {
            n.to_vec()
        }
        fn agg(&self, _: &[f64], _: &[Vec<f64>]) -> Vec<f64> {
            vec![99.0]
        }
        fn end(&self, _: usize, _: &[Vec<f64>], _: &[Vec<f64>]) -> bool {
            true
        }
    }

    struct WrongDim;

    impl Gpf for WrongDim {
        fn msg(&self, n: &[f64], _: &[f64]) -> Vec<f64> {
            n.to_vec()
        }
        fn agg(&self, _: &[f64], _: &[Vec<f64>]) -> Vec<f64> {
            vec![1.0, 2.0]
        }
        fn end(&self, _: usize, _: &[Vec<f64>], _: &[Vec<f64>]) -> bool {
            false
        }
    }

    fn ring(n: usize) -> VectorGraph {
        // 2-regular: i → i+1 and i → i+2 (mod n).
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| [(i, (i + 1) % n), (i, (i + 2) % n)]).collect();
        VectorGraph::new(
            (0..n).map(|i| format!("n{i}")).collect(),
            vec![vec![0.5]; n],
            edges.clone(),
            vec![vec![0.0]; edges.len()],
        )
        .unwrap()
    }

    #[test]
    fn regular_graph_counts_in_one_step() {
        let out = run_gpf(&ring(5), &SumOnes, 3).unwrap();
        assert!(out.iter().all(|v| v == &vec![2.0]));
    }

    #[test]
    fn end_at_zero_returns_initial_vectors() {
        assert_eq!(run_gpf(&ring(4), &StopAtOnce, 5).unwrap(), vec![vec![0.5]; 4]);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(run_gpf(&ring(3), &WrongDim, 2), Err(AnalyticsError::Dimension(_))));
        assert!(run_gpf(&ring(3), &SumOnes, 0).is_err());
        assert!(VectorGraph::new(vec!["a".into()], vec![vec![1.0]], vec![(0, 1)], vec![vec![]]).is_err());
        assert!(VectorGraph::new(vec!["a".into(), "b".into()], vec![vec![1.0], vec![1.0, 2.0]], vec![], vec![]).is_err());
    }

    #[test]
    fn pagerank_small_cases() {
        let loop1 = Graph::from_triples([("a", "p", "a")]);
        for iters in 1..4 {
            assert!((pagerank(&loop1, 0.85, iters).unwrap().get("a").unwrap() - 1.0).abs() < 1e-15);
        }
        let cycle = Graph::from_triples([("a", "p", "b"), ("b", "q", "a")]);
        let pr = pagerank(&cycle, 0.85, 7).unwrap();
        assert_eq!(pr.scores, vec![("a".to_string(), 0.5), ("b".to_string(), 0.5)]);
        assert!(pagerank(&cycle, 1.0, 1).is_err());
        assert!(pagerank(&cycle, 0.85, 0).is_err());
    }

    #[test]
    fn dangling_mass_is_spread() {
        let g = Graph::from_triples([("a", "p", "b")]);
        let pr = pagerank(&g, 0.85, 10).unwrap();
        let total: f64 = pr.scores.iter().map(|(_, s)| s).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(pr.get("b").unwrap() > pr.get("a").unwrap());
    }

    #[test]
    fn label_filter_and_epsilon() {
        let g = Graph::from_triples([("a", "bus", "b"), ("b", "bus", "a"), ("a", "flight", "c")]);
        let mut cfg = PageRankConfig::new(0.85, 50);
        cfg.labels = Some(BTreeSet::from(["bus".to_string()]));
        let pr = pagerank_with(&g, &cfg).unwrap();
        // c keeps its node but loses its only in-edge.
        assert!(pr.get("c").unwrap() < pr.get("a").unwrap());
        cfg.epsilon = Some(1e-6);
        let early = pagerank_with(&g, &cfg).unwrap();
        assert!(early.residuals.len() < 50);
        assert!(*early.residuals.last().unwrap() < 1e-6);
    }

    #[test]
    fn single_run_matches_stepwise() {
        let g = Graph::from_triples([("a", "p", "b"), ("b", "p", "c"), ("c", "p", "a"), ("a", "p", "c"), ("d", "p", "a")]);
        let stepwise = pagerank(&g, 0.85, 12).unwrap();
        let whole = pagerank_gpf(&g, 0.85, 12, None).unwrap();
        for (n, s) in &stepwise.scores {
            assert_eq!(whole[n], *s);
        }
    }

    #[test]
    fn degree_instances() {
        let g = Graph::from_triples([("a", "p", "b"), ("a", "q", "b"), ("c", "p", "b"), ("b", "p", "a")]);
        let inn = degrees(&g, Direction::In);
        let out = degrees(&g, Direction::Out);
        assert_eq!(inn["b"], 2);
        assert_eq!(inn["c"], 0);
        assert_eq!(out["a"], 1);
        assert_eq!(out["b"], 1);
    }
}
