//! Emergent schemas: quotient graphs over node partitions, (bi)simulation
//! checks, and the coarsest bisimilar refinement of a partition.

use std::collections::{BTreeMap, BTreeSet};

use kg_core::{Edge, Graph};
use thiserror::Error;

/// Parts larger than this are named by index and size instead of members.
pub const NAME_MEMBER_LIMIT: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("node `{0}` is in no part")]
    Uncovered(String),
    #[error("node `{0}` is in more than one part")]
    Overlap(String),
    #[error("node `{0}` is not in the graph")]
    UnknownNode(String),
    #[error("partition line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type NodeRelation = BTreeSet<(String, String)>;

/// Disjoint non-empty parts, kept in sorted order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<BTreeSet<String>>,
}

impl Partition {
    pub fn new<I: IntoIterator<Item = BTreeSet<String>>>(parts: I) -> Result<Self, SchemaError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for part in parts {
            if part.is_empty() {
                continue;
            }
            if let Some(v) = part.iter().find(|v| !seen.insert((*v).clone())) {
                return Err(SchemaError::Overlap(v.clone()));
            }
            out.push(part);
        }
        out.sort();
        Ok(Partition { parts: out })
    }

    pub fn singletons(g: &Graph) -> Self {
        Partition { parts: g.nodes().iter().map(|v| BTreeSet::from([v.clone()])).collect() }
    }

    pub fn whole(g: &Graph) -> Self {
        Partition::new([g.nodes().clone()]).expect("one part cannot overlap")
    }

    pub fn parts(&self) -> &[BTreeSet<String>] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part index of every node.
    pub fn index(&self) -> BTreeMap<&str, usize> {
        self.parts.iter().enumerate().flat_map(|(i, p)| p.iter().map(move |v| (v.as_str(), i))).collect()
    }

    /// Errors unless the parts cover exactly the graph's nodes.
    pub fn check_covers(&self, g: &Graph) -> Result<(), SchemaError> {
        let index = self.index();
        if let Some(v) = g.nodes().iter().find(|v| !index.contains_key(v.as_str())) {
            return Err(SchemaError::Uncovered(v.clone()));
        }
        if let Some(v) = index.keys().find(|v| !g.nodes().contains(**v)) {
            return Err(SchemaError::UnknownNode(v.to_string()));
        }
        Ok(())
    }

    /// `node<TAB>partId` lines; ids are arbitrary strings.
    pub fn parse_tsv(text: &str) -> Result<Self, SchemaError> {
        let mut groups: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (v, id) = match line.split('\t').collect::<Vec<_>>()[..] {
                [v, id] if !v.is_empty() && !id.is_empty() => (v, id),
                _ => return Err(SchemaError::Parse { line: i + 1, reason: "expected `node<TAB>partId`".into() }),
            };
            if !seen.insert(v) {
                return Err(SchemaError::Overlap(v.to_string()));
            }
            groups.entry(id).or_default().insert(v.to_string());
        }
        Partition::new(groups.into_values())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, part) in self.parts.iter().enumerate() {
            for v in part {
                out.push_str(&format!("{v}\t{i}\n"));
            }
        }
        out
    }
}

/// A quotient graph with the membership map `v ↦ [v]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub graph: Graph,
    pub block_of: BTreeMap<String, String>,
}

impl Quotient {
    /// `{(v, [v]) | v ∈ V}`.
    pub fn membership(&self) -> NodeRelation {
        self.block_of.iter().map(|(v, b)| (v.clone(), b.clone())).collect()
    }
}

fn part_name(k: usize, part: &BTreeSet<String>) -> String {
    if part.len() > NAME_MEMBER_LIMIT {
        format!("part:{k} (n={})", part.len())
    } else {
        let members: Vec<&str> = part.iter().map(String::as_str).collect();
        format!("{{{}}}", members.join("|"))
    }
}

/// Nodes are the parts; `(U, l, W)` is an edge iff some `(u, l, w) ∈ E`
/// has `u ∈ U` and `w ∈ W`.
pub fn quotient(g: &Graph, part: &Partition) -> Result<Quotient, SchemaError> {
    part.check_covers(g)?;
    let names: Vec<String> = part.parts.iter().enumerate().map(|(k, p)| part_name(k, p)).collect();
    let block_of: BTreeMap<String, String> =
        part.index().into_iter().map(|(v, i)| (v.to_string(), names[i].clone())).collect();
    let edges: Vec<Edge> = g.edges().iter().map(|e| Edge::new(&block_of[&e.s], &e.p, &block_of[&e.o])).collect();
    Ok(Quotient { graph: Graph::new(names, Vec::<String>::new(), edges), block_of })
}

fn related(r: &NodeRelation) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (a, b) in r {
        out.entry(a.as_str()).or_default().insert(b.as_str());
    }
    out
}

fn forward_holds(g1: &Graph, g2: &Graph, r: &NodeRelation) -> bool {
    let succ = related(r);
    r.iter().all(|(v, v2)| {
        g1.out_edges(v).all(|e| {
            let targets = succ.get(e.o.as_str());
            g2.out_edges(v2).any(|e2| e2.p == e.p && targets.is_some_and(|t| t.contains(e2.o.as_str())))
        })
    })
}

/// Every `(v, v′) ∈ r` and `(v, p, w) ∈ E1` has some `(v′, p, w′) ∈ E2`
/// with `(w, w′) ∈ r`.
pub fn check_simulation(g1: &Graph, g2: &Graph, r: &NodeRelation) -> bool {
    forward_holds(g1, g2, r)
}

/// `r` is a simulation of `g1` by `g2` and its inverse one of `g2` by `g1`.
pub fn check_bisimulation(g1: &Graph, g2: &Graph, r: &NodeRelation) -> bool {
    let inverse: NodeRelation = r.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    forward_holds(g1, g2, r) && forward_holds(g2, g1, &inverse)
}

/// Coarsest refinement of `init` in which all members of a part have the
/// same `(label, target part)` signatures.
pub fn refine(g: &Graph, init: &Partition) -> Result<Partition, SchemaError> {
    init.check_covers(g)?;
    let mut current = init.clone();
    loop {
        let index = current.index();
        let mut groups: BTreeMap<(usize, BTreeSet<(&str, usize)>), BTreeSet<String>> = BTreeMap::new();
        for v in g.nodes() {
            let sig = g.out_edges(v).map(|e| (e.p.as_str(), index[e.o.as_str()])).collect();
            groups.entry((index[v.as_str()], sig)).or_default().insert(v.clone());
        }
        if groups.len() == current.len() {
            return Ok(current);
        }
        current = Partition::new(groups.into_values())?;
    }
}

/// Quotient over [`refine`]`(g, init)`; its membership relation is a
/// bisimulation between `g` and the quotient.
pub fn bisim_min_quotient(g: &Graph, init: &Partition) -> Result<Quotient, SchemaError> {
    quotient(g, &refine(g, init)?)
}
